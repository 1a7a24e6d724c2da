#include "willmore/verify.hpp"

#include <cmath>
#include <random>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

CheckResult check(std::string suite, std::string name, double value, double tol) {
  return {std::move(suite), std::move(name), value, tol, std::isfinite(value) && value <= tol};
}

}  // namespace

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

FirstVariations finite_difference_variations(const SphereParam& param, const MetricModel& model,
                                             std::span<const double> f, double eps, std::vector<double>& realized) {
  const auto grid = param.grid();
  if (static_cast<int>(f.size()) != grid->size()) throw ShapeError("normal speed does not match the surface grid");
  const SurfaceGeometry geom = geometry(param, model);
  const int band = grid->transform_band();

  std::array<std::vector<double>, 3> disp;
  std::vector<double> v(f.size());
  for (int c = 0; c < 3; ++c) {
    for (std::size_t n = 0; n < f.size(); ++n) v[n] = f[n] * geom.node(n).nu[c];
    disp[c] = grid->analyze(v, band);
  }
  std::array<std::vector<double>, 3> at_nodes;
  for (int c = 0; c < 3; ++c) at_nodes[c] = grid->synthesize(disp[c]);
  realized.resize(f.size());
  for (std::size_t n = 0; n < f.size(); ++n)
    realized[n] = Vec3(at_nodes[0][n], at_nodes[1][n], at_nodes[2][n]).dot(geom.node(n).nu_lower);

  const SphereParam base = resampled(param, band, param.n_theta, param.n_phi);
  auto shifted = [&](double s) {
    SphereParam p = base;
    for (int c = 0; c < 3; ++c)
      for (std::size_t k = 0; k < disp[c].size(); ++k) p.coeffs[c][k] += s * disp[c][k];
    const SurfaceGeometry g = geometry(p, model);
    return std::array<double, 4>{0.5 * g.integrate([](const NodeGeometry& n) { return n.H * n.H; }),
                                 g.integrate([](const NodeGeometry& n) { return n.aring_sq; }),
                                 2.0 * g.integrate([](const NodeGeometry& n) { return n.einstein_nn; }), g.area()};
  };
  const auto plus = shifted(eps), minus = shifted(-eps);
  FirstVariations out;
  out.dW = (plus[0] - minus[0]) / (2.0 * eps);
  out.dU = (plus[1] - minus[1]) / (2.0 * eps);
  out.dV = (plus[2] - minus[2]) / (2.0 * eps);
  out.dArea = (plus[3] - minus[3]) / (2.0 * eps);
  return out;
}

std::vector<double> random_speed(const SurfaceGeometry& geom, unsigned seed, int max_degree, double radius) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(sh_count(max_degree), 0.0);
  for (int l = 0; l <= max_degree; ++l)
    for (int m = -l; m <= l; ++m) c[sh_index(l, m)] = normal(rng) / (1.0 + l);
  std::vector<double> f = geom.grid().synthesize(c);
  for (double& x : f) x *= radius / std::sqrt(4.0 * kPi);
  return f;
}

std::vector<CheckResult> run_verification(const MetricModel& model, const VerifyOptions& opts) {
  if (opts.surfaces < 1) throw ValidationError("verify.surfaces: must be >= 1");
  std::vector<CheckResult> out;
  for (int s = 0; s < opts.surfaces; ++s) {
    const std::string tag = "surface" + std::to_string(s);
    const SphereParam param =
        s == 0 ? build_round_sphere(Vec3::Zero(), opts.radius, opts.band_limit, opts.n_theta, opts.n_phi, model.rho)
               : build_perturbed_sphere(Vec3(0.1, -0.05, 0.05) * opts.radius, opts.radius, opts.amplitude,
                                        opts.max_degree, opts.seed + s, opts.band_limit, opts.n_theta, opts.n_phi);
    const SurfaceGeometry geom = geometry(param, model);
    const FunctionalReport rep = evaluate(geom, model);
    const double R = std::sqrt(geom.area() / (4.0 * kPi));

    out.push_back(check("splitting", tag, std::abs(rep.splitting_residual), 1e-6 * (1.0 + rep.W)));

    const std::vector<double> sigma = intrinsic_scalar_curvature(geom);
    double gauss = 0.0, gb = 0.0;
    for (std::size_t n = 0; n < geom.size(); ++n) {
      const auto& nd = geom.node(n);
      gauss = std::max(gauss, std::abs(sigma[n] - (nd.scal - 2.0 * nd.ric_nn + 0.5 * nd.H * nd.H - nd.aring_sq)));
      gb += sigma[n] * nd.dmu;
    }
    out.push_back(check("gauss", tag, gauss, 1e-6 / (R * R)));
    out.push_back(check("gauss_bonnet", tag, std::abs(gb - 8.0 * kPi), 1e-6 * 8.0 * kPi));

    const double scale = geom.area() / R;
    out.push_back(check("divergence", tag + ".position", tangential_divergence_check(geom, position_field()),
                        1e-8 * scale));
    const Vec3 b = Vec3(0.3, -0.5, 0.8).normalized();
    out.push_back(check("divergence", tag + ".constant", tangential_divergence_check(geom, constant_field(b)),
                        1e-8 * scale));

    const std::vector<double> f = random_speed(geom, opts.seed * 7919u + s, 3, R);
    std::vector<double> realized;
    const FirstVariations fd = finite_difference_variations(param, model, f, 1e-5 * R, realized);
    VariationField field;
    field.values = realized;
    const FirstVariations an = first_variations(geom, model, field);
    double fmax = 0.0;
    for (double x : realized) fmax = std::max(fmax, std::abs(x));
    const double floor_energy = 1e-6 * fmax / R, floor_area = 1e-6 * fmax * R;
    out.push_back(check("variation", tag + ".dW", relative_error(an.dW, fd.dW, floor_energy), 1e-4));
    out.push_back(check("variation", tag + ".dU", relative_error(an.dU, fd.dU, floor_energy), 1e-4));
    out.push_back(check("variation", tag + ".dV", relative_error(an.dV, fd.dV, floor_energy), 1e-4));
    out.push_back(check("variation", tag + ".dArea", relative_error(an.dArea, fd.dArea, floor_area), 1e-4));
  }
  return out;
}

}  // namespace willmore
