#pragma once

// Analytic ambient metrics g = g^E + h written in geodesic normal
// coordinates on the Euclidean ball B_rho, with pointwise evaluators for
// the metric, its first two derivatives and the curvature tensors.

#include <string>

#include "willmore/types.hpp"

namespace willmore {

enum class MetricKind { Flat, SpaceForm, QuadraticCurvature };

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& name);

/// Immutable description of an ambient metric. Construct through the
/// make_* factories, which validate the input and measure h0.
struct MetricModel {
  MetricKind kind = MetricKind::Flat;
  double k = 0.0;                  ///< sectional curvature (SpaceForm)
  Mat3 ric0 = Mat3::Zero();        ///< prescribed Ric(0) (QuadraticCurvature)
  Vec3 scal_grad0 = Vec3::Zero();  ///< prescribed grad Scal(0) (QuadraticCurvature)
  double rho = 1.0;                ///< coordinate ball radius
  double h0 = 0.0;                 ///< measured bound |x|^-2|h| + |x|^-1|dh| + |d2h|

  /// Taylor coefficients of the QuadraticCurvature metric,
  ///   g_ij = delta_ij - 1/3 quad[i][j](k,l) x_k x_l - 1/6 cubic[i][j][k](l,m) x_k x_l x_m,
  /// where quad is R_{ikjl}(0) symmetrized in (k,l) and cubic is
  /// nabla_m R_{ikjl}(0) symmetrized in (k,l,m). Filled by the factory.
  std::array<std::array<Mat3, 3>, 3> quad{};
  std::array<std::array<std::array<Mat3, 3>, 3>, 3> cubic{};

  /// Scal(0) implied by the model.
  double scal0() const;
  /// Ric(0) implied by the model.
  Mat3 ricci0() const;
  /// grad Scal(0) implied by the model.
  Vec3 grad_scal0() const;
};

MetricModel make_flat(double rho);
MetricModel make_space_form(double k, double rho);
MetricModel make_quadratic_curvature(const Mat3& ric0, const Vec3& scal_grad0, double rho);

/// Coefficients (alpha, beta) of the Bianchi-consistent ansatz
/// nabla_m Ric_ij = alpha s_m delta_ij + beta (s_i delta_jm + s_j delta_im).
struct RicciGradientAnsatz {
  double alpha;
  double beta;
};
RicciGradientAnsatz ricci_gradient_ansatz();

struct MetricSample {
  Mat3 g;
  MetricGrad dg;
  MetricHess d2g;
};

/// Metric and its first two partial derivatives at x. Throws DomainError
/// when |x| >= rho.
MetricSample metric_at(const MetricModel& model, const Vec3& x);

/// Metric only; used by volume quadrature where derivatives are not needed.
Mat3 metric_value(const MetricModel& model, const Vec3& x);

struct CurvatureBundle {
  Vec3 point;
  Mat3 g;
  Mat3 g_inv;
  MetricGrad dg;
  MetricHess d2g;
  Christoffel gamma;
  Mat3 ric;
  double scal = 0.0;
  Mat3 einstein;
  Vec3 grad_scal = Vec3::Zero();
};

/// Full curvature bundle at x, including grad Scal by central differences
/// with step 1e-5 * rho.
CurvatureBundle curvature_at(const MetricModel& model, const Vec3& x);

/// Same as curvature_at but leaves grad_scal zero. This is what the surface
/// geometry evaluates at every quadrature node.
CurvatureBundle curvature_no_gradient(const MetricModel& model, const Vec3& x);

/// Deviation quotient |x|^-2|h| + |x|^-1|dh| + |d2h| (Frobenius norms) at x != 0.
double deviation_quotient(const MetricModel& model, const Vec3& x);

/// Maximum deviation quotient over `samples` pseudo-random points in
/// B_{rho/2}. Deterministic for a fixed seed.
double measure_h0(const MetricModel& model, int samples = 1000, unsigned seed = 7);

}  // namespace willmore
