#pragma once

// Real orthonormal spherical harmonics on a Gauss-Legendre x uniform-phi
// grid, with analytic theta/phi derivatives and a quadrature-based forward
// transform.
//
// Convention: Y_lm for m > 0 is sqrt(2) Pbar_l^m(cos t) cos(m p), for m < 0
// it is sqrt(2) Pbar_l^|m|(cos t) sin(|m| p), and Y_l0 = Pbar_l^0(cos t).
// Pbar is the associated Legendre function normalized to unit L2 norm on the
// sphere, without the Condon-Shortley phase. Coefficients are stored in
// (l, m) lexicographic order, index l*l + l + m.

#include <memory>
#include <span>
#include <vector>

namespace willmore {

constexpr int sh_index(int l, int m) { return l * l + l + m; }
constexpr int sh_count(int band) { return (band + 1) * (band + 1); }
/// Degree l of the coefficient stored at `index`.
int sh_degree(int index);

/// Normalized associated Legendre values and their first three theta
/// derivatives at one colatitude, for 0 <= m <= l <= band.
class LegendreColumn {
 public:
  LegendreColumn(int band, double theta);
  double value(int deriv, int l, int m) const { return data_[deriv][tri(l, m)]; }
  int band() const { return band_; }

 private:
  static int tri(int l, int m) { return l * (l + 1) / 2 + m; }
  int band_;
  std::vector<double> data_[4];
};

class SphericalGrid {
 public:
  SphericalGrid(int n_theta, int n_phi);

  /// Shared, cached grid instance.
  static std::shared_ptr<const SphericalGrid> get(int n_theta, int n_phi);

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int size() const { return n_theta_ * n_phi_; }
  /// Largest degree the forward transform resolves exactly.
  int transform_band() const { return band_; }

  int node(int i, int j) const { return i * n_phi_ + j; }
  double theta(int i) const { return theta_[i]; }
  double cos_theta(int i) const { return cos_theta_[i]; }
  double sin_theta(int i) const { return sin_theta_[i]; }
  double phi(int j) const { return phi_[j]; }
  /// Weight for integrating over the unit sphere, d(cos t) dp.
  double sphere_weight(int i) const { return sphere_weight_[i]; }
  /// Weight for integrating a density given per dt dp (includes 1/sin t).
  double param_weight(int i) const { return sphere_weight_[i] / sin_theta_[i]; }

  /// Node values of d_t^dtheta d_p^dphi of sum_lm c_lm Y_lm. The band is
  /// inferred from coeffs.size() and must not exceed transform_band().
  std::vector<double> synthesize(std::span<const double> coeffs, int dtheta = 0, int dphi = 0) const;

  /// Quadrature projection c_lm = sum_nodes w f Y_lm for l <= band.
  std::vector<double> analyze(std::span<const double> values, int band) const;

  /// Value of d_t^dtheta d_p^dphi Y_lm at node (i, j).
  double basis(int l, int m, int i, int j, int dtheta = 0, int dphi = 0) const;

 private:
  int n_theta_;
  int n_phi_;
  int band_;
  std::vector<double> theta_, cos_theta_, sin_theta_, sphere_weight_, phi_;
  std::vector<LegendreColumn> legendre_;
  std::vector<double> cos_mp_, sin_mp_;  // [j * (band+1) + m]
};

/// sum_lm c_lm d_t^dtheta d_p^dphi Y_lm at an arbitrary (theta, phi),
/// poles included.
double evaluate_expansion(std::span<const double> coeffs, double theta, double phi, int dtheta = 0, int dphi = 0);

/// Gauss-Legendre nodes on [-1, 1] in descending order with weights.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace willmore
