#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "willmore/ambient.hpp"
#include "willmore/errors.hpp"
#include "willmore/functionals.hpp"
#include "willmore/optimize.hpp"
#include "willmore/surface.hpp"

using namespace willmore;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form geodesic-sphere family in the space form of curvature k.
double family_W(double k, double r) { return 8 * kPi * std::pow(std::cos(std::sqrt(k) * r), 2); }
double family_A(double k, double r) { return 4 * kPi * std::pow(std::sin(std::sqrt(k) * r), 2) / k; }
double family_lambda(double k, double r) {
  const double h = 1e-4 * r;
  return (family_W(k, r + h) - family_W(k, r - h)) / (family_A(k, r + h) - family_A(k, r - h));
}

OptimizeOptions options(double area) {
  OptimizeOptions o;
  o.area_target = area;
  o.el_tol = 1e-7;
  return o;
}

}  // namespace

TEST(Optimize, DefaultInitialSurface) {
  const double a = 4 * kPi * 0.01;
  const SphereParam p = default_initial_surface(a, 8, 24, 48);
  const SurfaceGeometry g = geometry(p, make_flat(1.0));
  EXPECT_NEAR(g.area(), a, 1e-14);
  EXPECT_LT(sphere_fit(g).aE.norm(), 1e-15);
}

TEST(Optimize, FlatShrinksToRoundSphere) {
  const MetricModel m = make_flat(1.0);
  const double a = 4 * kPi * 0.01;
  const OptimizeOptions o = options(a);
  const SolveResult res = solve(m, build_round_sphere(Vec3(0.01, 0.0, 0.0), 0.11, 8, 24, 48), o);
  ASSERT_TRUE(res.converged);
  EXPECT_NEAR(res.lambda, 0.0, 1e-6);
  EXPECT_NEAR(res.report.W, 8 * kPi, 1e-8);
  EXPECT_LE(std::abs(res.report.area - a) / a, o.area_tol);
  const SphereFit fit = sphere_fit(geometry(res.surface, m));
  EXPECT_NEAR(fit.RE, 0.1, 1e-8);
  EXPECT_LE(fit.aring_norm, 1e-6);
  EXPECT_LE(res.gradient_check, 1e-4);
  ASSERT_FALSE(res.history.empty());
  EXPECT_NEAR(res.history.back().area, res.report.area, 1e-14);

  // W, lambda and U are translation invariant.
  const SurfaceGeometry moved = geometry(translated(res.surface, Vec3(0.05, -0.02, 0.03)), m);
  const FunctionalReport rep = evaluate(moved, m);
  EXPECT_NEAR(rep.W, res.report.W, 1e-8);
  EXPECT_NEAR(rep.lambda_lsq, res.report.lambda_lsq, 1e-8);
  EXPECT_NEAR(rep.U, res.report.U, 1e-8);
}

TEST(Optimize, Deterministic) {
  const MetricModel m = make_flat(1.0);
  const OptimizeOptions o = options(4 * kPi * 0.01);
  const SphereParam init = build_perturbed_sphere(Vec3::Zero(), 0.1, 0.02, 3, 4, 6, 16, 32);
  const SolveResult a = solve(m, init, o);
  const SolveResult b = solve(m, init, o);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].W, b.history[i].W);
    EXPECT_EQ(a.history[i].area, b.history[i].area);
    EXPECT_EQ(a.history[i].el_residual, b.history[i].el_residual);
    EXPECT_EQ(a.history[i].lambda_estimate, b.history[i].lambda_estimate);
  }
  for (int c = 0; c < 3; ++c) EXPECT_EQ(a.surface.coeffs[c], b.surface.coeffs[c]);
}

TEST(Optimize, SpaceFormMatchesFamilyMultiplier) {
  const double k = 0.5, r = 0.1;
  const MetricModel m = make_space_form(k, 1.0);
  const double a = family_A(k, r);
  const OptimizeOptions o = options(a);
  const SolveResult res = solve(m, build_round_sphere(Vec3::Zero(), 0.11, 8, 24, 48, m.rho), o);
  ASSERT_TRUE(res.converged);
  const double oracle = family_lambda(k, r);
  EXPECT_NEAR(oracle, -2 * k, 1e-6);
  EXPECT_NEAR(res.lambda, oracle, 1e-3 * std::abs(oracle));
  EXPECT_NEAR(res.report.W, family_W(k, r), 1e-6);
  EXPECT_GT(res.report.min_H, 0.0);

  // First-variation consistency dW = lambda dArea along f = g(e1, nu) / H.
  const SurfaceGeometry g = geometry(res.surface, m);
  const VariationField f = variation_field_from_b(g, Vec3::UnitX());
  const FirstVariations v = first_variations(g, m, f);
  double fnorm = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) fnorm += f.values[n] * f.values[n] * g.node(n).dmu;
  fnorm = std::sqrt(fnorm);
  EXPECT_LE(std::abs(v.dW - res.lambda * v.dArea),
            1e-4 * (std::abs(res.lambda) * std::abs(v.dArea) + res.report.el_residual * fnorm) + 1e-12);
}

TEST(Optimize, MultiplierExtraction) {
  const MetricModel flat = make_flat(1.0);
  const MultiplierResult mr = extract_multiplier(geometry(build_round_sphere(Vec3::Zero(), 0.1, 8, 24, 48), flat), flat);
  EXPECT_NEAR(mr.lambda, 0.0, 1e-8);
  EXPECT_LE(mr.residual, 1e-6);

  const MetricModel sf = make_space_form(1.0, 1.0);
  for (double r : {0.08, 0.04}) {
    const SurfaceGeometry g = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48, sf.rho), sf);
    EXPECT_LE(std::abs(extract_multiplier(g, sf).lambda + 2.0), 0.5 * r);
  }

  const SurfaceGeometry bad =
      geometry(build_perturbed_sphere(Vec3::Zero(), 0.1, 0.35, 6, 2, 8, 24, 48), flat);
  ASSERT_LT(bad.min_H(), 0.0);
  EXPECT_THROW(extract_multiplier(bad, flat), HypothesisViolation);
}

TEST(Optimize, RejectsNonConvexStart) {
  const MetricModel flat = make_flat(1.0);
  const SphereParam bad = build_perturbed_sphere(Vec3::Zero(), 0.1, 0.35, 6, 2, 8, 24, 48);
  EXPECT_THROW(solve(flat, bad, options(4 * kPi * 0.01)), HypothesisViolation);
}

TEST(Optimize, OptionValidation) {
  const MetricModel flat = make_flat(1.0);
  OptimizeOptions o;
  EXPECT_THROW(o.validate(flat), ValidationError);
  o.area_target = 0.1;
  o.el_tol = -1.0;
  EXPECT_THROW(o.validate(flat), ValidationError);
  o.el_tol = 1e-6;
  EXPECT_NO_THROW(o.validate(flat));
}

TEST(Optimize, FrozenCenterInCurvatureGradient) {
  Mat3 ric = Mat3::Zero();
  ric.diagonal() << 1.0, 2.0, 3.0;
  const MetricModel m = make_quadratic_curvature(ric, Vec3(1.0, 0.0, 0.0), 1.0);
  const double r = 0.05;
  OptimizeOptions o = options(4 * kPi * r * r);
  o.freeze_center = true;
  const SphereParam init = build_ellipsoid(Vec3::Zero(), Vec3(1.04, 1.0, 0.96) * r, 8, 24, 48);
  const SolveResult res = solve(m, init, o);
  EXPECT_TRUE(res.converged);
  EXPECT_LT(sphere_fit(geometry(res.surface, m)).aE.norm(), 1e-12);
  EXPECT_LE(std::abs(res.report.area - o.area_target) / o.area_target, o.area_tol);
}
