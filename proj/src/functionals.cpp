#include "willmore/functionals.hpp"

#include <cmath>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

// <S, T> = gamma^ac gamma^bd S_ab T_cd for symmetric S.
double pair(const Mat2& gi, const Mat2& s, const Mat2& t) { return (gi * s * gi * t.transpose()).trace(); }

std::vector<double> node_values(const SurfaceGeometry& geom, double (*get)(const NodeGeometry&)) {
  std::vector<double> v(geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) v[n] = get(geom.node(n));
  return v;
}

}  // namespace

double hawking_mass(double area, double W) {
  return std::sqrt(area) / std::pow(16.0 * kPi, 1.5) * (16.0 * kPi - 2.0 * W);
}

std::vector<double> euler_lagrange_operator(const SurfaceGeometry& geom) {
  const std::vector<double> H = node_values(geom, [](const NodeGeometry& n) { return n.H; });
  std::vector<double> out = laplace_beltrami(geom, H);
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& n = geom.node(i);
    out[i] += n.H * n.aring_sq + n.H * n.ric_nn;
  }
  return out;
}

MultiplierEstimate estimate_multiplier(const SurfaceGeometry& geom) {
  const std::vector<double> el = euler_lagrange_operator(geom);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& n = geom.node(i);
    num += el[i] * n.H * n.dmu;
    den += n.H * n.H * n.dmu;
  }
  MultiplierEstimate out;
  out.lambda_lsq = -num / den;
  double res = 0.0;
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& n = geom.node(i);
    const double r = el[i] + out.lambda_lsq * n.H;
    res += r * r * n.dmu;
  }
  out.residual = std::sqrt(res);

  if (geom.min_H() > 0.0) {
    std::vector<double> logH(geom.size());
    for (std::size_t i = 0; i < geom.size(); ++i) logH[i] = std::log(geom.node(i).H);
    const ScalarDerivatives d = surface_derivatives(geom, logH);
    double integral = 0.0;
    for (std::size_t i = 0; i < geom.size(); ++i) {
      const auto& n = geom.node(i);
      const double grad_sq = d.grad[i].dot(n.gamma_inv * d.grad[i]);
      integral += (grad_sq + n.aring_sq + n.ric_nn) * n.dmu;
    }
    out.lambda_id = -integral / geom.area();
  }
  return out;
}

SphereFit sphere_fit(const SurfaceGeometry& geom) {
  SphereFit fit;
  const double areaE = geom.area_euclid();
  fit.RE = std::sqrt(areaE / (4.0 * kPi));
  Vec3 moment = Vec3::Zero();
  for (const auto& n : geom.nodes()) moment += n.F * n.dmuE;
  fit.aE = moment / areaE;
  const double target = 2.0 / fit.RE;
  fit.mean_curvature_dev =
      std::sqrt(geom.integrate_euclid([&](const NodeGeometry& n) { return (n.HE - target) * (n.HE - target); }));
  fit.aring_norm = std::sqrt(geom.integrate_euclid([](const NodeGeometry& n) { return n.aringE_sq; }));
  return fit;
}

VolumeResult enclosed_volume(const SurfaceGeometry& geom, const MetricModel& model) {
  const Vec3 center = sphere_fit(geom).aE;
  std::vector<double> t, w;
  gauss_legendre(16, t, w);
  for (std::size_t q = 0; q < t.size(); ++q) {
    t[q] = 0.5 * (t[q] + 1.0);
    w[q] *= 0.5;
  }
  const SphericalGrid& grid = geom.grid();
  VolumeResult out;
  for (std::size_t idx = 0; idx < geom.size(); ++idx) {
    const auto& n = geom.node(idx);
    const int i = static_cast<int>(idx) / grid.n_phi();
    const Vec3 ray = n.F - center;
    const double flux = ray.dot(n.normal_euclid) * grid.param_weight(i);
    if (!(ray.dot(n.normal_euclid) > 0.0))
      throw NumericalError("surface is not star-shaped about its Euclidean center of gravity");
    double radial = 0.0;
    for (std::size_t q = 0; q < t.size(); ++q) {
      const Mat3 g = metric_value(model, center + t[q] * ray);
      radial += w[q] * t[q] * t[q] * std::sqrt(g.determinant());
    }
    out.volE += flux / 3.0;
    out.vol += flux * radial;
  }
  return out;
}

double ricci_average(const SurfaceGeometry& geom, const MetricModel& /*model*/) {
  return geom.integrate([](const NodeGeometry& n) { return n.ric_nn; }) / geom.area();
}

double ricci_average_frozen(const SurfaceGeometry& geom, const Mat3& ric) {
  return geom.integrate([&](const NodeGeometry& n) { return n.nu.dot(ric * n.nu); }) / geom.area();
}

FunctionalReport evaluate(const SurfaceGeometry& geom, const MetricModel& model) {
  FunctionalReport r;
  r.area = geom.area();
  r.area_euclid = geom.area_euclid();
  r.W = 0.5 * geom.integrate([](const NodeGeometry& n) { return n.H * n.H; });
  r.U = geom.integrate([](const NodeGeometry& n) { return n.aring_sq; });
  r.V = 2.0 * geom.integrate([](const NodeGeometry& n) { return n.einstein_nn; });
  if (!(r.area > 0.0) || !std::isfinite(r.W)) throw NumericalError("quadrature produced a non-positive area");
  r.genus = 0;
  r.splitting_residual = r.W - 8.0 * kPi * (1 - r.genus) - r.U - r.V;

  const MultiplierEstimate mult = estimate_multiplier(geom);
  r.lambda_id = mult.lambda_id;
  r.lambda_lsq = mult.lambda_lsq;
  r.el_residual = mult.residual;
  r.el_residual_scaled = mult.residual * r.area;
  r.hawking = hawking_mass(r.area, r.W);
  r.fit = sphere_fit(geom);
  const VolumeResult vol = enclosed_volume(geom, model);
  r.vol = vol.vol;
  r.volE = vol.volE;
  r.ricci_avg = ricci_average(geom, model);
  r.min_H = geom.min_H();
  r.scal0 = model.scal0();
  if (r.min_H > 0.0) {
    std::vector<double> logH(geom.size());
    for (std::size_t i = 0; i < geom.size(); ++i) logH[i] = std::log(geom.node(i).H);
    const ScalarDerivatives d = surface_derivatives(geom, logH);
    double s = 0.0;
    for (std::size_t i = 0; i < geom.size(); ++i) {
      const auto& n = geom.node(i);
      s += d.grad[i].dot(n.gamma_inv * d.grad[i]) * n.dmu;
    }
    r.grad_log_H_sq = s;
  }
  return r;
}

VariationField variation_field_from_b(const SurfaceGeometry& geom, const Vec3& b) {
  if (!(geom.min_H() > 0.0)) throw HypothesisViolation("f = g(b, nu)/H needs H > 0 on the surface");
  VariationField f;
  f.b = b;
  f.values.resize(geom.size());
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& n = geom.node(i);
    f.values[i] = b.dot(n.nu_lower) / n.H;
  }
  return f;
}

FirstVariations first_variations(const SurfaceGeometry& geom, const MetricModel& /*model*/, const VariationField& f) {
  if (f.values.size() != geom.size()) throw ShapeError("variation field does not match the surface grid");
  const std::vector<double> el = euler_lagrange_operator(geom);
  const ScalarDerivatives d = surface_derivatives(geom, f.values);
  FirstVariations out;
  for (std::size_t i = 0; i < geom.size(); ++i) {
    const auto& n = geom.node(i);
    const double fi = f.values[i];
    const Mat2& gi = n.gamma_inv;
    out.dArea += n.H * fi * n.dmu;
    out.dW -= el[i] * fi * n.dmu;
    out.dU -= (2.0 * pair(gi, n.Aring, d.hess[i]) + 2.0 * fi * pair(gi, n.Aring, n.ric_tan) +
               fi * n.H * n.aring_sq) *
              n.dmu;
    const double omega_grad = n.omega.dot(gi * d.grad[i]);
    out.dV += (-fi * n.H * n.einstein_nn - 0.5 * fi * n.H * n.scal + 2.0 * fi * pair(gi, n.Aring, n.einstein_tan) -
               2.0 * omega_grad) *
              n.dmu;
  }
  return out;
}

}  // namespace willmore
