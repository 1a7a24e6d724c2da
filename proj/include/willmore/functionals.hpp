#pragma once

// Willmore energy and companion functionals on a SurfaceGeometry: the
// splitting W = 8 pi + U + V, multiplier estimators, enclosed volume,
// Hawking mass, sphere-fit diagnostics and first variations.

#include <optional>
#include <span>
#include <vector>

#include "willmore/ambient.hpp"
#include "willmore/surface.hpp"

namespace willmore {

struct SphereFit {
  double RE = 0.0;             ///< sqrt(|Sigma|^E / 4 pi)
  Vec3 aE = Vec3::Zero();      ///< Euclidean center of gravity
  double mean_curvature_dev = 0.0;  ///< ||H^E - 2/RE||_{L2(dmu^E)}
  double aring_norm = 0.0;          ///< ||Aring^E||_{L2(dmu^E)}
};

struct VolumeResult {
  double volE = 0.0;
  double vol = 0.0;
};

struct FunctionalReport {
  double W = 0.0;
  double U = 0.0;
  double V = 0.0;
  double area = 0.0;
  double area_euclid = 0.0;
  int genus = 0;
  double splitting_residual = 0.0;  ///< W - 8 pi (1 - q) - U - V
  std::optional<double> lambda_id;  ///< integrated identity, needs H > 0
  double lambda_lsq = 0.0;
  double el_residual = 0.0;         ///< ||EL + lambda_lsq H||_{L2(dmu)}
  double el_residual_scaled = 0.0;  ///< el_residual * area (dimensionless)
  double hawking = 0.0;
  double vol = 0.0;
  double volE = 0.0;
  SphereFit fit;
  double ricci_avg = 0.0;
  std::optional<double> grad_log_H_sq;
  double min_H = 0.0;
  double scal0 = 0.0;  ///< Scal(0) of the model the report was evaluated in
};

/// Normal speed of a variation, optionally generated by f = H^-1 g(b, nu).
struct VariationField {
  std::vector<double> values;
  std::optional<Vec3> b;
};

struct FirstVariations {
  double dW = 0.0;
  double dU = 0.0;
  double dV = 0.0;
  double dArea = 0.0;
};

/// Per-node Euler-Lagrange operator Delta H + H |Aring|^2 + H Ric(nu, nu).
std::vector<double> euler_lagrange_operator(const SurfaceGeometry& geom);

struct MultiplierEstimate {
  double lambda_lsq = 0.0;
  double residual = 0.0;  ///< L2(dmu) norm of the EL operator plus lambda_lsq H
  std::optional<double> lambda_id;
};
MultiplierEstimate estimate_multiplier(const SurfaceGeometry& geom);

FunctionalReport evaluate(const SurfaceGeometry& geom, const MetricModel& model);

/// Euclidean enclosed volume and the g-volume via radial Gauss rules from aE.
VolumeResult enclosed_volume(const SurfaceGeometry& geom, const MetricModel& model);

SphereFit sphere_fit(const SurfaceGeometry& geom);

/// f = g(b, nu) / H; throws HypothesisViolation unless H > 0 everywhere.
VariationField variation_field_from_b(const SurfaceGeometry& geom, const Vec3& b);

FirstVariations first_variations(const SurfaceGeometry& geom, const MetricModel& model, const VariationField& f);

/// Hawking mass |Sigma|^{1/2} / (16 pi)^{3/2} (16 pi - 2 W).
double hawking_mass(double area, double W);

/// (1/|Sigma|) int Ric(nu, nu) dmu.
double ricci_average(const SurfaceGeometry& geom, const MetricModel& model);
/// Same average with a fixed ambient Ricci matrix in place of Ric(x).
double ricci_average_frozen(const SurfaceGeometry& geom, const Mat3& ric);

}  // namespace willmore
