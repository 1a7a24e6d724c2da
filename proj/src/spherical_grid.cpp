#include "willmore/spherical_grid.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

double trig_derivative(bool is_cos, int m, double angle, int order) {
  const double c = std::cos(m * angle), s = std::sin(m * angle);
  const double mm = static_cast<double>(m);
  switch (order % 4) {
    case 0: return std::pow(mm, order) * (is_cos ? c : s);
    case 1: return std::pow(mm, order) * (is_cos ? -s : c);
    case 2: return std::pow(mm, order) * (is_cos ? -c : -s);
    default: return std::pow(mm, order) * (is_cos ? s : -c);
  }
}

// Derivative factor of cos(m p) / sin(m p) given precomputed cos, sin.
inline double trig_from_table(bool is_cos, double mm, double c, double s, int order) {
  switch (order) {
    case 0: return is_cos ? c : s;
    case 1: return mm * (is_cos ? -s : c);
    case 2: return mm * mm * (is_cos ? -c : -s);
    default: return mm * mm * mm * (is_cos ? s : -c);
  }
}

}  // namespace

int sh_degree(int index) {
  int l = static_cast<int>(std::sqrt(static_cast<double>(index)));
  while (l * l > index) --l;
  while ((l + 1) * (l + 1) <= index) ++l;
  return l;
}

LegendreColumn::LegendreColumn(int band, double theta) : band_(band) {
  const int n = (band + 1) * (band + 2) / 2;
  for (auto& d : data_) d.assign(n, 0.0);
  const double s = std::sin(theta), c = std::cos(theta);
  auto set = [&](int l, int m, const double (&v)[4]) {
    for (int d = 0; d < 4; ++d) data_[d][tri(l, m)] = v[d];
  };
  auto get = [&](int l, int m, double (&v)[4]) {
    for (int d = 0; d < 4; ++d) v[d] = data_[d][tri(l, m)];
  };

  double diag[4] = {1.0 / std::sqrt(4.0 * kPi), 0.0, 0.0, 0.0};
  for (int m = 0; m <= band; ++m) {
    if (m > 0) {
      // Pbar_m^m = d_m sin(t) Pbar_{m-1}^{m-1}
      const double dm = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
      const double p[4] = {diag[0], diag[1], diag[2], diag[3]};
      diag[0] = dm * s * p[0];
      diag[1] = dm * (c * p[0] + s * p[1]);
      diag[2] = dm * (-s * p[0] + 2.0 * c * p[1] + s * p[2]);
      diag[3] = dm * (-c * p[0] - 3.0 * s * p[1] + 3.0 * c * p[2] + s * p[3]);
    }
    set(m, m, diag);
    // x * P and its theta derivatives, x = cos t
    auto times_x = [&](const double (&p)[4], double (&out)[4]) {
      out[0] = c * p[0];
      out[1] = -s * p[0] + c * p[1];
      out[2] = -c * p[0] - 2.0 * s * p[1] + c * p[2];
      out[3] = s * p[0] - 3.0 * c * p[1] - 3.0 * s * p[2] + c * p[3];
    };
    if (m + 1 <= band) {
      double xp[4];
      times_x(diag, xp);
      const double em = std::sqrt(2.0 * m + 3.0);
      const double v[4] = {em * xp[0], em * xp[1], em * xp[2], em * xp[3]};
      set(m + 1, m, v);
    }
    for (int l = m + 2; l <= band; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(m) * m));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(m) * m) /
                                 (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      double p1[4], p2[4], xp[4];
      get(l - 1, m, p1);
      get(l - 2, m, p2);
      times_x(p1, xp);
      const double v[4] = {a * (xp[0] - b * p2[0]), a * (xp[1] - b * p2[1]), a * (xp[2] - b * p2[2]),
                           a * (xp[3] - b * p2[3])};
      set(l, m, v);
    }
  }
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = x;
    nodes[n - 1 - i] = -x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

SphericalGrid::SphericalGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
  if (n_theta < 2 || n_phi < 4) throw ValidationError("grid: need n_theta >= 2 and n_phi >= 4");
  band_ = std::min(n_theta - 1, (n_phi - 1) / 2);
  std::vector<double> x, w;
  gauss_legendre(n_theta, x, w);
  theta_.resize(n_theta);
  cos_theta_ = x;
  sin_theta_.resize(n_theta);
  sphere_weight_.resize(n_theta);
  const double dphi = 2.0 * kPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    theta_[i] = std::acos(x[i]);
    sin_theta_[i] = std::sqrt((1.0 - x[i]) * (1.0 + x[i]));
    sphere_weight_[i] = w[i] * dphi;
    legendre_.emplace_back(band_, theta_[i]);
  }
  phi_.resize(n_phi);
  cos_mp_.resize(static_cast<size_t>(n_phi) * (band_ + 1));
  sin_mp_.resize(cos_mp_.size());
  for (int j = 0; j < n_phi; ++j) {
    phi_[j] = j * dphi;
    for (int m = 0; m <= band_; ++m) {
      cos_mp_[j * (band_ + 1) + m] = std::cos(m * phi_[j]);
      sin_mp_[j * (band_ + 1) + m] = std::sin(m * phi_[j]);
    }
  }
}

std::shared_ptr<const SphericalGrid> SphericalGrid::get(int n_theta, int n_phi) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const SphericalGrid>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{n_theta, n_phi}];
  if (!slot) slot = std::make_shared<const SphericalGrid>(n_theta, n_phi);
  return slot;
}

std::vector<double> SphericalGrid::synthesize(std::span<const double> coeffs, int dtheta, int dphi) const {
  const int band = sh_degree(static_cast<int>(coeffs.size()) - 1);
  if (sh_count(band) != static_cast<int>(coeffs.size())) throw ShapeError("coefficient vector is not (L+1)^2 long");
  if (band > band_) throw ShapeError("expansion band exceeds the grid's transform band");
  std::vector<double> out(size(), 0.0);
  std::vector<double> ac(band + 1), as(band + 1);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < n_theta_; ++i) {
    const LegendreColumn& col = legendre_[i];
    for (int m = 0; m <= band; ++m) {
      double sc = 0.0, ss = 0.0;
      for (int l = m; l <= band; ++l) {
        const double p = col.value(dtheta, l, m);
        sc += coeffs[sh_index(l, m)] * p;
        if (m > 0) ss += coeffs[sh_index(l, -m)] * p;
      }
      ac[m] = m == 0 ? sc : sqrt2 * sc;
      as[m] = sqrt2 * ss;
    }
    for (int j = 0; j < n_phi_; ++j) {
      double v = 0.0;
      for (int m = 0; m <= band; ++m) {
        const double c = cos_mp_[j * (band_ + 1) + m], s = sin_mp_[j * (band_ + 1) + m];
        v += ac[m] * trig_from_table(true, m, c, s, dphi);
        if (m > 0) v += as[m] * trig_from_table(false, m, c, s, dphi);
      }
      out[node(i, j)] = v;
    }
  }
  return out;
}

std::vector<double> SphericalGrid::analyze(std::span<const double> values, int band) const {
  if (static_cast<int>(values.size()) != size()) throw ShapeError("field size does not match the grid");
  if (band > band_) throw ShapeError("requested band exceeds the grid's transform band");
  std::vector<double> coeffs(sh_count(band), 0.0);
  std::vector<double> fc(band + 1), fs(band + 1);
  const double sqrt2 = std::sqrt(2.0);
  for (int i = 0; i < n_theta_; ++i) {
    for (int m = 0; m <= band; ++m) {
      double sc = 0.0, ss = 0.0;
      for (int j = 0; j < n_phi_; ++j) {
        const double f = values[node(i, j)];
        sc += f * cos_mp_[j * (band_ + 1) + m];
        ss += f * sin_mp_[j * (band_ + 1) + m];
      }
      fc[m] = sc;
      fs[m] = ss;
    }
    const double w = sphere_weight_[i];
    const LegendreColumn& col = legendre_[i];
    for (int l = 0; l <= band; ++l) {
      coeffs[sh_index(l, 0)] += w * col.value(0, l, 0) * fc[0];
      for (int m = 1; m <= l; ++m) {
        const double p = w * sqrt2 * col.value(0, l, m);
        coeffs[sh_index(l, m)] += p * fc[m];
        coeffs[sh_index(l, -m)] += p * fs[m];
      }
    }
  }
  return coeffs;
}

double SphericalGrid::basis(int l, int m, int i, int j, int dtheta, int dphi) const {
  const int am = std::abs(m);
  const double p = legendre_[i].value(dtheta, l, am);
  if (m == 0) return dphi == 0 ? p : 0.0;
  const double c = cos_mp_[j * (band_ + 1) + am], s = sin_mp_[j * (band_ + 1) + am];
  return std::sqrt(2.0) * p * trig_from_table(m > 0, am, c, s, dphi);
}

double evaluate_expansion(std::span<const double> coeffs, double theta, double phi, int dtheta, int dphi) {
  const int band = sh_degree(static_cast<int>(coeffs.size()) - 1);
  const LegendreColumn col(band, theta);
  double v = 0.0;
  for (int l = 0; l <= band; ++l) {
    v += coeffs[sh_index(l, 0)] * col.value(dtheta, l, 0) * (dphi == 0 ? 1.0 : 0.0);
    for (int m = 1; m <= l; ++m) {
      const double p = std::sqrt(2.0) * col.value(dtheta, l, m);
      v += coeffs[sh_index(l, m)] * p * trig_derivative(true, m, phi, dphi);
      v += coeffs[sh_index(l, -m)] * p * trig_derivative(false, m, phi, dphi);
    }
  }
  return v;
}

}  // namespace willmore
