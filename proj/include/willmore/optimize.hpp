#pragma once

// Area-constrained critical points of W over spherical-harmonic coefficients.
// Augmented Lagrangian in alpha = area / a, inner BFGS with Armijo
// backtracking on a degree-preconditioned, radius-scaled coefficient vector.

#include <optional>
#include <vector>

#include "willmore/ambient.hpp"
#include "willmore/functionals.hpp"
#include "willmore/surface.hpp"

namespace willmore {

struct OptimizeOptions {
  double area_target = 0.0;
  int max_outer = 12;
  int max_inner = 200;
  double el_tol = 1e-6;    ///< bound on el_residual * area
  double area_tol = 1e-9;  ///< relative
  double penalty0 = 1e3;
  double step0 = 1.0;      ///< initial step in scaled coefficients
  /// Pins the Euclidean center of gravity aE at its initial value. Residuals
  /// are then measured modulo the constraint forces of aE.
  bool freeze_center = false;
  unsigned seed = 1;

  /// Throws ValidationError on non-positive tolerances or targets.
  void validate(const MetricModel& model) const;
};

struct HistoryRow {
  int iter = 0;
  double W = 0.0;
  double area = 0.0;
  double el_residual = 0.0;
  double lambda_estimate = 0.0;
};

struct SolveResult {
  SphereParam surface;
  double lambda = 0.0;
  std::optional<double> lambda_id;
  FunctionalReport report;
  bool converged = false;
  double residual_scaled = 0.0;  ///< residual * area as tested for convergence
  int outer_rounds = 0;
  int inner_steps = 0;
  int reparameterizations = 0;
  double gradient_check = 0.0;  ///< relative FD disagreement at the first iterate
  std::vector<HistoryRow> history;
};

/// Throws HypothesisViolation if an accepted iterate has H <= 0 somewhere and
/// NumericalError if the first-iterate gradient check fails.
SolveResult solve(const MetricModel& model, const SphereParam& init, const OptimizeOptions& opts);

struct MultiplierResult {
  double lambda = 0.0;
  double residual = 0.0;
  std::optional<double> lambda_id;
};
/// Least-squares multiplier; throws HypothesisViolation unless H > 0.
MultiplierResult extract_multiplier(const SurfaceGeometry& geom, const MetricModel& model);

/// Default initial surface: centered coordinate sphere of radius sqrt(a / 4 pi).
SphereParam default_initial_surface(double area_target, int band_limit, int n_theta, int n_phi);

struct DriftResult {
  SolveResult frozen;
  SolveResult free;
  Vec3 drift = Vec3::Zero();  ///< aE(free) - aE(frozen)
  double drift_along_gradient = 0.0;  ///< drift . grad Scal(0) / |grad Scal(0)|
};
/// Compares frozen-center and free-center solves from the same start.
DriftResult drift_experiment(const MetricModel& model, const SphereParam& init, const OptimizeOptions& opts);

}  // namespace willmore
