#include "willmore/ambient.hpp"

#include <cmath>
#include <random>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SeriesValue {
  double f = 0.0;
  double df = 0.0;
  double d2f = 0.0;
};

// Power series sum_n c_n t^n with c_{n+1} = c_n * ratio(n), plus its first
// two t-derivatives.
template <typename Ratio>
SeriesValue power_series(double c0, Ratio ratio, double t) {
  SeriesValue out;
  double c = c0;
  double tn = 1.0;    // t^n
  double tn1 = 0.0;   // t^(n-1)
  double tn2 = 0.0;   // t^(n-2)
  for (int n = 0; n < 400; ++n) {
    const double term = c * tn;
    out.f += term;
    out.df += n * c * tn1;
    out.d2f += n * (n - 1) * c * tn2;
    if (n > 4 && std::abs(term) < 1e-18 * (1.0 + std::abs(out.f)) && std::abs(c * tn1) * n < 1e-18 * (1.0 + std::abs(out.df)))
      break;
    c *= ratio(n);
    tn2 = tn1;
    tn1 = tn;
    tn *= t;
  }
  return out;
}

// sn_k(s)^2 / s^2 as a function of t = k s^2.
SeriesValue tangential_factor(double t) {
  return power_series(1.0, [](int n) { return -4.0 / ((2.0 * n + 3.0) * (2.0 * n + 4.0)); }, t);
}

// (1 - sn_k(s)^2 / s^2) / (k s^2) as a function of t = k s^2.
SeriesValue radial_defect(double t) {
  return power_series(1.0 / 3.0, [](int n) { return -4.0 / ((2.0 * n + 5.0) * (2.0 * n + 6.0)); }, t);
}

double delta(int i, int j) { return i == j ? 1.0 : 0.0; }

void check_domain(const MetricModel& model, const Vec3& x) {
  if (!(x.norm() < model.rho))
    throw DomainError("point (" + std::to_string(x[0]) + ", " + std::to_string(x[1]) + ", " +
                      std::to_string(x[2]) + ") lies outside B_rho with rho = " + std::to_string(model.rho));
}

MetricSample flat_sample() {
  MetricSample out;
  out.g = Mat3::Identity();
  for (auto& m : out.dg) m.setZero();
  for (auto& row : out.d2g)
    for (auto& m : row) m.setZero();
  return out;
}

MetricSample space_form_sample(const MetricModel& model, const Vec3& x) {
  const double k = model.k;
  const double u = x.squaredNorm();
  const SeriesValue tf = tangential_factor(k * u);
  const SeriesValue rd = radial_defect(k * u);
  // g_ij = phi(u) delta_ij + psi(u) x_i x_j with u = |x|^2.
  const double phi = tf.f, dphi = k * tf.df, d2phi = k * k * tf.d2f;
  const double psi = k * rd.f, dpsi = k * k * rd.df, d2psi = k * k * k * rd.d2f;

  MetricSample out;
  out.g = phi * Mat3::Identity() + psi * x * x.transpose();
  for (int kk = 0; kk < 3; ++kk)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        out.dg[kk](i, j) = 2.0 * x[kk] * (dphi * delta(i, j) + dpsi * x[i] * x[j]) +
                           psi * (delta(i, kk) * x[j] + delta(j, kk) * x[i]);
  for (int kk = 0; kk < 3; ++kk)
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          out.d2g[kk][l](i, j) = 2.0 * delta(kk, l) * (dphi * delta(i, j) + dpsi * x[i] * x[j]) +
                                 4.0 * x[kk] * x[l] * (d2phi * delta(i, j) + d2psi * x[i] * x[j]) +
                                 2.0 * x[kk] * dpsi * (delta(i, l) * x[j] + delta(j, l) * x[i]) +
                                 2.0 * x[l] * dpsi * (delta(i, kk) * x[j] + delta(j, kk) * x[i]) +
                                 psi * (delta(i, kk) * delta(j, l) + delta(j, kk) * delta(i, l));
  return out;
}

MetricSample quadratic_sample(const MetricModel& model, const Vec3& x) {
  MetricSample out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Mat3& q = model.quad[i][j];
      double cub = 0.0;
      for (int kk = 0; kk < 3; ++kk) cub += x[kk] * x.dot(model.cubic[i][j][kk] * x);
      out.g(i, j) = delta(i, j) - x.dot(q * x) / 3.0 - cub / 6.0;
      for (int p = 0; p < 3; ++p) {
        out.dg[p](i, j) = -2.0 / 3.0 * q.row(p).dot(x) - 0.5 * x.dot(model.cubic[i][j][p] * x);
        for (int r = 0; r < 3; ++r)
          out.d2g[p][r](i, j) = -2.0 / 3.0 * q(p, r) - model.cubic[i][j][p].row(r).dot(x);
      }
    }
  return out;
}

double sym_error(const Mat3& m) { return (m - m.transpose()).cwiseAbs().maxCoeff(); }

// Tensor built as in the three-dimensional decomposition of the Riemann
// tensor from a symmetric two-tensor P and its trace t:
//   T_ikjl = d_ij P_kl + d_kl P_ij - d_il P_kj - d_kj P_il - t/2 (d_ij d_kl - d_il d_kj).
double riemann_from_ricci(const Mat3& p, double trace, int i, int kk, int j, int l) {
  return delta(i, j) * p(kk, l) + delta(kk, l) * p(i, j) - delta(i, l) * p(kk, j) - delta(kk, j) * p(i, l) -
         0.5 * trace * (delta(i, j) * delta(kk, l) - delta(i, l) * delta(kk, j));
}

void compute_christoffel_and_ricci(CurvatureBundle& cb) {
  const Mat3& gi = cb.g_inv;
  // T[l](i,j) = d_i g_jl + d_j g_il - d_l g_ij
  for (int kk = 0; kk < 3; ++kk) cb.gamma[kk].setZero();
  std::array<Mat3, 3> lowered;
  for (int l = 0; l < 3; ++l)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) lowered[l](i, j) = 0.5 * (cb.dg[i](j, l) + cb.dg[j](i, l) - cb.dg[l](i, j));
  for (int kk = 0; kk < 3; ++kk)
    for (int l = 0; l < 3; ++l) cb.gamma[kk] += gi(kk, l) * lowered[l];

  // dgamma[m][k](i,j) = d_m Gamma^k_ij
  std::array<std::array<Mat3, 3>, 3> dgamma;
  for (int m = 0; m < 3; ++m) {
    const Mat3 dginv = -gi * cb.dg[m] * gi;
    std::array<Mat3, 3> dlowered;
    for (int l = 0; l < 3; ++l)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          dlowered[l](i, j) = 0.5 * (cb.d2g[i][m](j, l) + cb.d2g[j][m](i, l) - cb.d2g[l][m](i, j));
    for (int kk = 0; kk < 3; ++kk) {
      dgamma[m][kk].setZero();
      for (int l = 0; l < 3; ++l) dgamma[m][kk] += dginv(kk, l) * lowered[l] + gi(kk, l) * dlowered[l];
    }
  }

  // Ric_ij = d_k G^k_ij - d_j G^k_ik + G^k_kl G^l_ij - G^k_jl G^l_ik
  Mat3 ric = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int kk = 0; kk < 3; ++kk) {
        v += dgamma[kk][kk](i, j) - dgamma[j][kk](i, kk);
        for (int l = 0; l < 3; ++l)
          v += cb.gamma[kk](kk, l) * cb.gamma[l](i, j) - cb.gamma[kk](j, l) * cb.gamma[l](i, kk);
      }
      ric(i, j) = v;
    }
  cb.ric = 0.5 * (ric + ric.transpose());
  cb.scal = (gi.cwiseProduct(cb.ric)).sum();
  cb.einstein = cb.ric - 0.5 * cb.scal * cb.g;
}

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::Flat: return "flat";
    case MetricKind::SpaceForm: return "space_form";
    case MetricKind::QuadraticCurvature: return "quadratic_curvature";
  }
  return "unknown";
}

MetricKind metric_kind_from_string(const std::string& name) {
  if (name == "flat") return MetricKind::Flat;
  if (name == "space_form") return MetricKind::SpaceForm;
  if (name == "quadratic_curvature") return MetricKind::QuadraticCurvature;
  throw ValidationError("metric.kind: unknown metric kind '" + name + "'");
}

double MetricModel::scal0() const {
  switch (kind) {
    case MetricKind::Flat: return 0.0;
    case MetricKind::SpaceForm: return 6.0 * k;
    case MetricKind::QuadraticCurvature: return ric0.trace();
  }
  return 0.0;
}

Mat3 MetricModel::ricci0() const {
  switch (kind) {
    case MetricKind::Flat: return Mat3::Zero();
    case MetricKind::SpaceForm: return 2.0 * k * Mat3::Identity();
    case MetricKind::QuadraticCurvature: return ric0;
  }
  return Mat3::Zero();
}

Vec3 MetricModel::grad_scal0() const {
  return kind == MetricKind::QuadraticCurvature ? scal_grad0 : Vec3::Zero();
}

RicciGradientAnsatz ricci_gradient_ansatz() {
  // trace_ij:  3 alpha + 2 beta = 1
  // div:       alpha + 4 beta   = 1/2   (contracted Bianchi)
  Eigen::Matrix2d a;
  a << 3.0, 2.0, 1.0, 4.0;
  const Eigen::Vector2d sol = a.partialPivLu().solve(Eigen::Vector2d(1.0, 0.5));
  return {sol[0], sol[1]};
}

MetricModel make_flat(double rho) {
  if (!(rho > 0.0)) throw ValidationError("metric.rho: must be positive");
  MetricModel m;
  m.kind = MetricKind::Flat;
  m.rho = rho;
  m.h0 = 0.0;
  return m;
}

MetricModel make_space_form(double k, double rho) {
  if (!(rho > 0.0)) throw ValidationError("metric.rho: must be positive");
  if (!std::isfinite(k)) throw ValidationError("metric.k: must be finite");
  if (k > 0.0 && !(rho * std::sqrt(k) < kPi))
    throw ValidationError("metric.rho: normal coordinates of a positive space form need rho < pi/sqrt(k)");
  MetricModel m;
  m.kind = MetricKind::SpaceForm;
  m.k = k;
  m.rho = rho;
  m.h0 = measure_h0(m);
  return m;
}

MetricModel make_quadratic_curvature(const Mat3& ric0, const Vec3& scal_grad0, double rho) {
  if (!(rho > 0.0)) throw ValidationError("metric.rho: must be positive");
  if (!ric0.allFinite() || !scal_grad0.allFinite()) throw ValidationError("metric.ric0: entries must be finite");
  if (sym_error(ric0) > 1e-12 * (1.0 + ric0.cwiseAbs().maxCoeff()))
    throw ValidationError("metric.ric0: matrix must be symmetric");

  MetricModel m;
  m.kind = MetricKind::QuadraticCurvature;
  m.ric0 = 0.5 * (ric0 + ric0.transpose());
  m.scal_grad0 = scal_grad0;
  m.rho = rho;

  const double scal = m.ric0.trace();
  const auto [alpha, beta] = ricci_gradient_ansatz();
  const Vec3& s = scal_grad0;
  // nabla_m Ric_ij
  std::array<Mat3, 3> dric;
  for (int mm = 0; mm < 3; ++mm)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        dric[mm](i, j) = alpha * s[mm] * delta(i, j) + beta * (s[i] * delta(j, mm) + s[j] * delta(i, mm));

  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      for (int kk = 0; kk < 3; ++kk)
        for (int l = 0; l < 3; ++l)
          m.quad[i][j](kk, l) = 0.5 * (riemann_from_ricci(m.ric0, scal, i, kk, j, l) +
                                       riemann_from_ricci(m.ric0, scal, i, l, j, kk));
      // cubic[i][j][k](l,m): symmetrize nabla_m R_ikjl over (k,l,m)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) {
            const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
            double sum = 0.0;
            for (const auto& p : perm) {
              // p = (k, l, m)
              sum += riemann_from_ricci(dric[p[2]], s[p[2]], i, p[0], j, p[1]);
            }
            m.cubic[i][j][a](b, c) = sum / 6.0;
          }
    }

  // Positive definiteness spot check over the coordinate ball.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    Vec3 x(uni(rng), uni(rng), uni(rng));
    if (x.norm() > 1.0 || x.norm() == 0.0) continue;
    if (n % 2 == 0) x.normalize();
    x *= 0.999 * rho;
    const Eigen::SelfAdjointEigenSolver<Mat3> es(metric_value(m, x));
    if (!(es.eigenvalues().minCoeff() > 0.0))
      throw ValidationError("metric.rho: quadratic-curvature metric is not positive definite on B_rho; reduce rho");
  }
  m.h0 = measure_h0(m);
  return m;
}

MetricSample metric_at(const MetricModel& model, const Vec3& x) {
  check_domain(model, x);
  switch (model.kind) {
    case MetricKind::Flat: return flat_sample();
    case MetricKind::SpaceForm: return space_form_sample(model, x);
    case MetricKind::QuadraticCurvature: return quadratic_sample(model, x);
  }
  return flat_sample();
}

Mat3 metric_value(const MetricModel& model, const Vec3& x) {
  check_domain(model, x);
  switch (model.kind) {
    case MetricKind::Flat: return Mat3::Identity();
    case MetricKind::SpaceForm: {
      const double u = x.squaredNorm();
      const double phi = tangential_factor(model.k * u).f;
      const double psi = model.k * radial_defect(model.k * u).f;
      return phi * Mat3::Identity() + psi * x * x.transpose();
    }
    case MetricKind::QuadraticCurvature: {
      Mat3 g;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double cub = 0.0;
          for (int kk = 0; kk < 3; ++kk) cub += x[kk] * x.dot(model.cubic[i][j][kk] * x);
          g(i, j) = delta(i, j) - x.dot(model.quad[i][j] * x) / 3.0 - cub / 6.0;
        }
      return g;
    }
  }
  return Mat3::Identity();
}

CurvatureBundle curvature_no_gradient(const MetricModel& model, const Vec3& x) {
  const MetricSample s = metric_at(model, x);
  CurvatureBundle cb;
  cb.point = x;
  cb.g = s.g;
  cb.g_inv = s.g.inverse();
  cb.dg = s.dg;
  cb.d2g = s.d2g;
  if (model.kind == MetricKind::Flat) {
    for (auto& m : cb.gamma) m.setZero();
    cb.ric.setZero();
    cb.scal = 0.0;
    cb.einstein.setZero();
    return cb;
  }
  compute_christoffel_and_ricci(cb);
  return cb;
}

CurvatureBundle curvature_at(const MetricModel& model, const Vec3& x) {
  CurvatureBundle cb = curvature_no_gradient(model, x);
  if (model.kind == MetricKind::Flat) return cb;
  const double step = 1e-5 * model.rho;
  Vec3 dscal;
  for (int kk = 0; kk < 3; ++kk) {
    Vec3 xp = x, xm = x;
    xp[kk] += step;
    xm[kk] -= step;
    dscal[kk] = (curvature_no_gradient(model, xp).scal - curvature_no_gradient(model, xm).scal) / (2.0 * step);
  }
  cb.grad_scal = cb.g_inv * dscal;
  return cb;
}

double deviation_quotient(const MetricModel& model, const Vec3& x) {
  const MetricSample s = metric_at(model, x);
  const double r = x.norm();
  const double h = (s.g - Mat3::Identity()).norm();
  double dh = 0.0, d2h = 0.0;
  for (int kk = 0; kk < 3; ++kk) {
    dh += s.dg[kk].squaredNorm();
    for (int l = 0; l < 3; ++l) d2h += s.d2g[kk][l].squaredNorm();
  }
  return h / (r * r) + std::sqrt(dh) / r + std::sqrt(d2h);
}

double measure_h0(const MetricModel& model, int samples, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double worst = 0.0;
  int taken = 0;
  while (taken < samples) {
    const Vec3 x(uni(rng), uni(rng), uni(rng));
    const double n = x.norm();
    if (n > 1.0 || n < 1e-3) continue;
    worst = std::max(worst, deviation_quotient(model, 0.5 * model.rho * x));
    ++taken;
  }
  return worst;
}

}  // namespace willmore
