#pragma once

// Radius sweeps over geodesic spheres or constrained minimizers, with
// deficit columns, resolution-doubling floors and log-log slope fits.

#include <optional>
#include <string>
#include <vector>

#include "willmore/ambient.hpp"
#include "willmore/functionals.hpp"
#include "willmore/optimize.hpp"

namespace willmore {

enum class SweepMode { GeodesicSpheres, Minimizers };
std::string to_string(SweepMode mode);
SweepMode sweep_mode_from_string(const std::string& name);

struct SweepSpec {
  MetricModel model;
  std::vector<double> radii;  ///< descending
  SweepMode mode = SweepMode::GeodesicSpheres;
  int band_limit = 8;
  int n_theta = 24;
  int n_phi = 48;
  OptimizeOptions optimizer;  ///< area_target is set per radius

  /// Throws ValidationError unless radii are positive, strictly descending,
  /// at least two, and below rho / 2.
  void validate() const;
};

struct SweepRow {
  double r = 0.0;
  bool ok = true;
  std::string failure;
  bool converged = true;
  double area = 0.0;
  double W = 0.0;
  double U = 0.0;
  double V = 0.0;
  double lambda = 0.0;  ///< family multiplier for geodesic spheres, solver multiplier for minimizers
  double lambda_lsq = 0.0;
  std::optional<double> lambda_family;  ///< W'(r) / A'(r) along the geodesic-sphere family
  double el_residual_scaled = 0.0;
  double hawking = 0.0;
  double vol = 0.0;
  double ricci_avg = 0.0;
  double min_H = 0.0;
  double epsilon = 0.0;  ///< max(0, -lambda * area)
  double D_W = 0.0;      ///< |W - 8 pi + (area / 3) Scal(0)|
  double D_lambda = 0.0; ///< |lambda + Scal(0) / 3|
  double D_ric = 0.0;    ///< |ricci_avg - Scal(0) / 3|
  double D_vol = 0.0;    ///< |vol - area^{3/2} / (6 sqrt pi)| / area^{3/2}
  double hawking_ratio = 0.0;  ///< m_H / vol
  double D_hawking = 0.0;      ///< |m_H / vol - Scal(0) / 16 pi|
};

/// Per-column deficit floors of one row, from resolution doubling plus a
/// rounding allowance.
struct RowFloors {
  double D_W = 0.0;
  double D_lambda = 0.0;
  double D_ric = 0.0;
  double D_vol = 0.0;
  double D_hawking = 0.0;
};

struct SlopeFit {
  std::string column;
  std::optional<double> slope;  ///< absent when fewer than two rows clear the floor
  double intercept = 0.0;
  double residual = 0.0;        ///< RMS of the log-log fit
  int rows_used = 0;
  bool floor_limited = false;   ///< some rows were dropped as floor-limited
  double max_deficit = 0.0;     ///< largest deficit over all valid rows
};

struct ConvergenceTable {
  std::vector<SweepRow> rows;
  std::vector<RowFloors> floors;
  std::vector<SlopeFit> slopes;
  const SlopeFit* slope(const std::string& column) const;
};

/// Least-squares slope of log(value) against log(r), dropping rows where
/// value <= 100 * floor or where `use` is false.
SlopeFit fit_slope(const std::string& column, const std::vector<double>& r, const std::vector<double>& value,
                   const std::vector<double>& floor, const std::vector<bool>& use);

/// Area of the centered coordinate sphere of radius r (a geodesic sphere).
double geodesic_sphere_area(const MetricModel& model, double r, int band_limit, int n_theta, int n_phi);

/// lambda = W'(r) / A'(r) along centered coordinate spheres, by
/// Richardson-extrapolated central differences.
double family_multiplier(const MetricModel& model, double r, int band_limit, int n_theta, int n_phi);

ConvergenceTable sweep(const SweepSpec& spec);

struct GradientRow {
  double r = 0.0;
  double area = 0.0;
  double vol = 0.0;
  double min_H = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double dV = 0.0;           ///< delta_f V for f = g(b, nu) / H, b = s / |s|
  double leading = 0.0;      ///< (1/2) vol g^E(b, s)
  double error = 0.0;        ///< |dV + leading|
  double ratio = 0.0;        ///< error / ((1/2) vol |s|)
  double dV_perp = 0.0;      ///< delta_f V for a unit b_perp orthogonal to s
  double C_perp = 0.0;       ///< |dV_perp| / (r area^{3/2})
  double C_perp_refined = 0.0;  ///< same on the doubled grid
};

struct GradientTable {
  std::vector<GradientRow> rows;
  SlopeFit ratio_slope;
  Vec3 b = Vec3::Zero();
  Vec3 b_perp = Vec3::Zero();
};

/// Needs |grad Scal(0)| > 0; uses centered geodesic spheres.
GradientTable gradient_experiment(const MetricModel& model, const std::vector<double>& radii, int band_limit = 8,
                                  int n_theta = 24, int n_phi = 48);

struct HawkingRow {
  double r = 0.0;
  double area = 0.0;
  double W = 0.0;
  double hawking = 0.0;
  double vol = 0.0;
  double ratio = 0.0;  ///< m_H / vol
  double error = 0.0;  ///< |ratio - Scal(0) / 16 pi|
  double min_H = 0.0;
};

struct HawkingTable {
  std::vector<HawkingRow> rows;
  double limit = 0.0;  ///< Scal(0) / 16 pi
  SlopeFit error_slope;
};

HawkingTable hawking_experiment(const MetricModel& model, const std::vector<double>& radii, int band_limit = 8,
                                int n_theta = 24, int n_phi = 48);

}  // namespace willmore
