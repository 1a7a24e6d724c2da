#pragma once

// Genus-0 surfaces as band-limited spherical-harmonic embeddings, and their
// extrinsic and intrinsic geometry with respect to both g and g^E.
//
// Sign convention: nu is the outward normal and A_ab = g(nabla_a nu, F_b),
// so a Euclidean round sphere of radius r has H = +2/r.

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <span>
#include <vector>

#include "willmore/ambient.hpp"
#include "willmore/spherical_grid.hpp"
#include "willmore/types.hpp"

namespace willmore {

struct SphereParam {
  int band_limit = 1;
  int n_theta = 0;
  int n_phi = 0;
  /// Coefficients of F^1, F^2, F^3, each of length (band_limit + 1)^2.
  std::array<std::vector<double>, 3> coeffs;

  /// Throws ValidationError on inconsistent sizes or an undersized grid.
  void validate() const;
  std::shared_ptr<const SphericalGrid> grid() const { return SphericalGrid::get(n_theta, n_phi); }
  /// Total coefficient count 3 (L+1)^2.
  int dof() const { return 3 * sh_count(band_limit); }
};

/// Exact coordinate sphere; throws DomainError if it leaves B_rho.
SphereParam build_round_sphere(const Vec3& center, double radius, int band_limit, int n_theta, int n_phi,
                               double rho = std::numeric_limits<double>::infinity());

/// Axis-aligned ellipsoid with the given semiaxes.
SphereParam build_ellipsoid(const Vec3& center, const Vec3& semiaxes, int band_limit, int n_theta, int n_phi);

/// Round sphere plus a random smooth perturbation: each coordinate receives
/// coefficients of degree 2..max_degree drawn N(0, 1) and scaled so the
/// perturbation has RMS size amplitude * radius.
SphereParam build_perturbed_sphere(const Vec3& center, double radius, double amplitude, int max_degree,
                                   unsigned seed, int band_limit, int n_theta, int n_phi);

SphereParam translated(const SphereParam& param, const Vec3& shift);
SphereParam scaled(const SphereParam& param, double factor);
/// Same surface on another band/grid; coefficients are zero-padded or truncated.
SphereParam resampled(const SphereParam& param, int band_limit, int n_theta, int n_phi);

/// Same surface re-fitted as a radial graph about `center`: node (t, p) is
/// mapped to where the ray from center in direction (t, p) meets the
/// surface. Removes tangential distortion; needs a star-shaped surface.
SphereParam radial_reparameterization(const SphereParam& param, const Vec3& center);

/// Embedding at an arbitrary parameter point (poles included).
Vec3 evaluate_point(const SphereParam& param, double theta, double phi);

struct NodeGeometry {
  Vec3 F;
  std::array<Vec3, 2> dF;  ///< F_theta, F_phi
  Vec3 normal_euclid;      ///< F_theta x F_phi

  Mat3 g, g_inv;
  Christoffel ambient_gamma;
  Mat3 ric;
  double scal = 0.0;
  Mat3 einstein;

  Vec3 nu;        ///< g-unit outward normal
  Vec3 nu_lower;  ///< g nu
  Mat2 gamma, gamma_inv;
  std::array<Mat2, 2> dgamma;         ///< dgamma[c](a,b) = d_c gamma_ab
  std::array<Mat2, 2> surface_gamma;  ///< surface_gamma[c](a,b) = Gamma~^c_ab
  Mat2 A, Aring;
  double H = 0.0;
  double aring_sq = 0.0;  ///< |Aring|^2
  double sigma_scal = 0.0;

  Vec3 nuE;
  Mat2 gammaE, AE, AringE;
  double HE = 0.0;
  double aringE_sq = 0.0;

  double ric_nn = 0.0;       ///< Ric(nu, nu)
  double einstein_nn = 0.0;  ///< G(nu, nu)
  Vec2 omega;                ///< Ric(nu, F_a)
  Mat2 ric_tan, einstein_tan;

  double sqrt_det = 0.0;  ///< sqrt(det gamma) per dt dp
  double dmu = 0.0;       ///< quadrature weight for the g area measure
  double dmuE = 0.0;      ///< quadrature weight for the Euclidean measure
};

class SurfaceGeometry {
 public:
  SurfaceGeometry(std::shared_ptr<const SphericalGrid> grid, std::vector<NodeGeometry> nodes);

  const SphericalGrid& grid() const { return *grid_; }
  std::shared_ptr<const SphericalGrid> grid_ptr() const { return grid_; }
  std::span<const NodeGeometry> nodes() const { return nodes_; }
  const NodeGeometry& node(std::size_t n) const { return nodes_[n]; }
  std::size_t size() const { return nodes_.size(); }

  double area() const { return area_; }
  double area_euclid() const { return area_euclid_; }
  double min_H() const;

  /// Quadrature of f against dmu (sequential, fixed order).
  double integrate(std::span<const double> f) const;
  double integrate(const std::function<double(const NodeGeometry&)>& f) const;
  double integrate_euclid(const std::function<double(const NodeGeometry&)>& f) const;

 private:
  std::shared_ptr<const SphericalGrid> grid_;
  std::vector<NodeGeometry> nodes_;
  double area_ = 0.0;
  double area_euclid_ = 0.0;
};

/// Full per-node geometry. Throws ImmersionError when det gamma <= 0 and
/// DomainError when a node leaves B_rho.
SurfaceGeometry geometry(const SphereParam& param, const MetricModel& model);

/// Coordinate gradient u_a and covariant Hessian (nabla^2 u)_ab of a node
/// field, via forward transform and analytic basis derivatives.
struct ScalarDerivatives {
  std::vector<Vec2> grad;
  std::vector<Mat2> hess;
};
ScalarDerivatives surface_derivatives(const SurfaceGeometry& geom, std::span<const double> field);

std::vector<double> laplace_beltrami(const SurfaceGeometry& geom, std::span<const double> field);

/// Intrinsic scalar curvature 2K of gamma, from gamma and its first two
/// parameter derivatives only.
std::vector<double> intrinsic_scalar_curvature(const SurfaceGeometry& geom);

/// Smooth vector field on B_rho with its coordinate Jacobian J(i, j) = d_j X^i.
struct VectorFieldEvaluator {
  std::function<Vec3(const Vec3&)> value;
  std::function<Mat3(const Vec3&)> jacobian;
};
VectorFieldEvaluator position_field();
VectorFieldEvaluator constant_field(const Vec3& b);

struct DivergenceIntegrals {
  double divergence = 0.0;  ///< int div_Sigma X dmu
  double normal_flux = 0.0; ///< int H g(X, nu) dmu
};
DivergenceIntegrals divergence_integrals(const SurfaceGeometry& geom, const VectorFieldEvaluator& field);

/// |int div_Sigma X dmu - int H g(X, nu) dmu|.
double tangential_divergence_check(const SurfaceGeometry& geom, const VectorFieldEvaluator& field);

/// Wavefront OBJ of the evaluated node grid plus both poles.
void write_obj(std::ostream& out, const SphereParam& param);

}  // namespace willmore
