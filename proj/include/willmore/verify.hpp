#pragma once

// Runtime identity suites: splitting, Gauss, Gauss-Bonnet, divergence and
// first variation against central finite differences.

#include <span>
#include <string>
#include <vector>

#include "willmore/ambient.hpp"
#include "willmore/functionals.hpp"
#include "willmore/surface.hpp"

namespace willmore {

struct CheckResult {
  std::string suite;
  std::string name;
  double value = 0.0;      ///< measured residual or relative error
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int surfaces = 4;  ///< one round sphere plus (surfaces - 1) perturbed spheres
  unsigned seed = 11;
  double radius = 0.1;
  double amplitude = 0.05;
  int max_degree = 4;
  int band_limit = 8;
  int n_theta = 24;
  int n_phi = 48;
};

/// Central differences of W, U, V and area along the normal speed f (node
/// values on param's grid). The displacement f nu is projected onto the
/// grid's full transform band, so the surface is resampled to that band; the
/// normal speed actually realized, g(P, nu), is written to `realized`.
FirstVariations finite_difference_variations(const SphereParam& param, const MetricModel& model,
                                             std::span<const double> f, double eps, std::vector<double>& realized);

/// Relative disagreement |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

/// Pseudo-random smooth normal speed of size ~radius on the geometry's nodes.
std::vector<double> random_speed(const SurfaceGeometry& geom, unsigned seed, int max_degree, double radius);

std::vector<CheckResult> run_verification(const MetricModel& model, const VerifyOptions& opts);

}  // namespace willmore
