#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "willmore/ambient.hpp"
#include "willmore/errors.hpp"
#include "willmore/surface.hpp"

using namespace willmore;

namespace {

constexpr double kPi = std::numbers::pi;

// Mean curvature (sum of principal curvatures) of the ellipsoid
// x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 at a point on it.
double ellipsoid_H(const Vec3& p, const Vec3& s) {
  const double a2 = s[0] * s[0], b2 = s[1] * s[1], c2 = s[2] * s[2];
  const double q = p[0] * p[0] / (a2 * a2) + p[1] * p[1] / (b2 * b2) + p[2] * p[2] / (c2 * c2);
  const double h = 1.0 / std::sqrt(q);
  return h * h * h * (a2 + b2 + c2 - p.squaredNorm()) / (a2 * b2 * c2);
}

Mat3 diag123() {
  Mat3 r = Mat3::Zero();
  r.diagonal() << 1.0, 2.0, 3.0;
  return r;
}

}  // namespace

TEST(Surface, RoundSphereNorthPole) {
  const SphereParam p = build_round_sphere(Vec3::Zero(), 0.1, 8, 24, 48);
  EXPECT_LT((evaluate_point(p, 0.0, 0.0) - Vec3(0, 0, 0.1)).norm(), 1e-14);
  EXPECT_LT((evaluate_point(p, kPi, 1.3) - Vec3(0, 0, -0.1)).norm(), 1e-14);
}

TEST(Surface, RoundSphereCoefficients) {
  const SphereParam p = build_round_sphere(Vec3(0.05, 0.0, 0.0), 0.1, 8, 24, 48);
  EXPECT_NEAR(p.coeffs[0][sh_index(0, 0)], 0.05 * std::sqrt(4 * kPi), 1e-15);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < sh_count(8); ++i)
      if (sh_degree(i) > 1) EXPECT_EQ(p.coeffs[c][i], 0.0);
  EXPECT_THROW(build_round_sphere(Vec3::Zero(), 0.6, 8, 24, 48, 0.5), DomainError);
}

TEST(Surface, RoundSphereFlatGeometry) {
  const double r = 0.1;
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48), make_flat(1.0));
  EXPECT_NEAR(geom.area(), 4 * kPi * r * r, 1e-14);
  EXPECT_NEAR(geom.area_euclid(), 4 * kPi * r * r, 1e-14);
  for (const NodeGeometry& n : geom.nodes()) {
    EXPECT_NEAR(n.H, 20.0, 1e-9);
    EXPECT_LT(n.aring_sq, 1e-18);
    EXPECT_NEAR(n.nu.dot(n.F / r), 1.0, 1e-12);
  }
}

TEST(Surface, GeodesicSphereInSpaceForm) {
  const double r = 0.2;
  const MetricModel m = make_space_form(1.0, 1.0);
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48, m.rho), m);
  for (const NodeGeometry& n : geom.nodes()) {
    EXPECT_NEAR(n.H, 2.0 / std::tan(r), 1e-6);
    EXPECT_LT(std::sqrt(n.aring_sq), 1e-8);
  }
  EXPECT_NEAR(geom.area(), 4 * kPi * std::sin(r) * std::sin(r), 1e-12);
}

TEST(Surface, EllipsoidMatchesClosedFormAndRefinement) {
  const Vec3 s(0.1, 0.1, 0.05);
  const SurfaceGeometry geom = geometry(build_ellipsoid(Vec3::Zero(), s, 8, 24, 48), make_flat(1.0));
  for (const NodeGeometry& n : geom.nodes()) EXPECT_NEAR(n.H, ellipsoid_H(n.F, s), 1e-9 * std::abs(n.H));
  const SurfaceGeometry fine = geometry(build_ellipsoid(Vec3::Zero(), s, 8, 96, 192), make_flat(1.0));
  const auto w = [](const NodeGeometry& n) { return n.H * n.H; };
  const double coarse_int = geom.integrate(w), fine_int = fine.integrate(w);
  // The integrand is not band limited; the refined grid is the oracle.
  EXPECT_NEAR(coarse_int, fine_int, 1e-6 * fine_int);
}

TEST(Surface, LaplacianEigenvaluesUnitSphere) {
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), 1.0, 8, 24, 48), make_flat(2.0));
  const SphericalGrid& g = geom.grid();
  const std::vector<double> ones(geom.size(), 1.0);
  for (double v : laplace_beltrami(geom, ones)) EXPECT_NEAR(v, 0.0, 1e-10);
  for (int l = 0; l <= 4; ++l)
    for (int m = -l; m <= l; ++m) {
      std::vector<double> y(geom.size());
      for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) y[g.node(i, j)] = g.basis(l, m, i, j);
      const std::vector<double> ly = laplace_beltrami(geom, y);
      for (std::size_t n = 0; n < y.size(); ++n) EXPECT_NEAR(ly[n], -l * (l + 1) * y[n], 1e-8);
    }
}

TEST(Surface, LaplacianOfHeightFunction) {
  const double r = 0.1;
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48), make_flat(1.0));
  std::vector<double> z(geom.size());
  for (std::size_t n = 0; n < z.size(); ++n) z[n] = geom.node(n).F[2];
  const std::vector<double> lz = laplace_beltrami(geom, z);
  for (std::size_t n = 0; n < z.size(); ++n) EXPECT_NEAR(lz[n], -2.0 / (r * r) * z[n], 1e-8);
}

TEST(Surface, LaplacianShapeMismatch) {
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), 0.1, 8, 24, 48), make_flat(1.0));
  const std::vector<double> wrong(10, 1.0);
  EXPECT_THROW(laplace_beltrami(geom, wrong), ShapeError);
}

TEST(Surface, IntrinsicCurvatureRoundSphere) {
  const double r = 0.1;
  const SurfaceGeometry geom = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48), make_flat(1.0));
  for (double v : intrinsic_scalar_curvature(geom)) EXPECT_NEAR(v, 2.0 / (r * r), 1e-6);
}

TEST(Surface, GaussBonnetAndEuclideanGaussEquation) {
  const MetricModel models[] = {make_flat(1.0), make_space_form(1.0, 1.0),
                                make_quadratic_curvature(diag123(), Vec3(0.5, 0.0, 0.0), 1.0)};
  for (const MetricModel& m : models) {
    for (unsigned seed = 1; seed <= 3; ++seed) {
      const SurfaceGeometry geom =
          geometry(build_perturbed_sphere(Vec3(0.01, 0.0, -0.01), 0.1, 0.05, 4, seed, 8, 24, 48), m);
      const std::vector<double> sc = intrinsic_scalar_curvature(geom);
      EXPECT_NEAR(geom.integrate(sc), 8 * kPi, 1e-6 * 8 * kPi);
      if (m.kind == MetricKind::Flat) {
        for (std::size_t n = 0; n < sc.size(); ++n) {
          const NodeGeometry& g = geom.node(n);
          EXPECT_NEAR(sc[n], 0.5 * g.H * g.H - g.aring_sq, 1e-6);
        }
      }
    }
  }
}

TEST(Surface, DivergenceIdentity) {
  const double r = 0.1;
  const SurfaceGeometry flat = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48), make_flat(1.0));
  const DivergenceIntegrals di = divergence_integrals(flat, position_field());
  EXPECT_NEAR(di.divergence, 2 * flat.area(), 1e-12);
  EXPECT_LE(tangential_divergence_check(flat, position_field()), 1e-8 * flat.area() / r);

  const SurfaceGeometry pert =
      geometry(build_perturbed_sphere(Vec3::Zero(), r, 0.05, 4, 7, 8, 24, 48), make_flat(1.0));
  EXPECT_LE(tangential_divergence_check(pert, constant_field(Vec3(0.3, -1.0, 0.5))), 1e-8);

  const MetricModel sf = make_space_form(1.0, 1.0);
  const SurfaceGeometry curved = geometry(build_round_sphere(Vec3::Zero(), r, 8, 24, 48, sf.rho), sf);
  EXPECT_LE(tangential_divergence_check(curved, position_field()), 1e-7);
  const DivergenceIntegrals dc = divergence_integrals(curved, position_field());
  EXPECT_NEAR(dc.divergence / curved.area(), 2.0, 2 * r * r);
}

TEST(Surface, ResolutionDoublingIsStable) {
  const MetricModel m = make_space_form(1.0, 1.0);
  const SphereParam p = build_perturbed_sphere(Vec3::Zero(), 0.1, 0.05, 4, 11, 6, 24, 48);
  const SurfaceGeometry a = geometry(p, m);
  const SurfaceGeometry b = geometry(resampled(p, 6, 48, 96), m);
  EXPECT_NEAR(a.area(), b.area(), 1e-8 * a.area());
  const auto w = [](const NodeGeometry& n) { return 0.5 * n.H * n.H; };
  EXPECT_NEAR(a.integrate(w), b.integrate(w), 1e-8 * a.integrate(w));
}

TEST(Surface, TransformsPreserveGeometry) {
  const SphereParam p = build_perturbed_sphere(Vec3::Zero(), 0.1, 0.05, 4, 5, 8, 24, 48);
  const MetricModel flat = make_flat(1.0);
  const SurfaceGeometry g0 = geometry(p, flat);
  const SurfaceGeometry g1 = geometry(translated(p, Vec3(0.02, 0.01, -0.03)), flat);
  const SurfaceGeometry g2 = geometry(scaled(p, 2.0), flat);
  const SphereParam fine = resampled(p, 16, 48, 96);
  const SurfaceGeometry g3 = geometry(radial_reparameterization(fine, Vec3::Zero()), flat);
  const auto w = [](const NodeGeometry& n) { return 0.5 * n.H * n.H; };
  EXPECT_NEAR(g1.integrate(w), g0.integrate(w), 1e-10);
  EXPECT_NEAR(g2.integrate(w), g0.integrate(w), 1e-10);
  EXPECT_NEAR(g2.area(), 4 * g0.area(), 1e-12);
  // The radial refit is not band limited; at L = 16 the truncation is small.
  EXPECT_NEAR(g3.area(), g0.area(), 1e-5 * g0.area());
}

TEST(Surface, ObjExport) {
  std::ostringstream os;
  write_obj(os, build_round_sphere(Vec3::Zero(), 0.1, 4, 12, 24));
  const std::string s = os.str();
  std::size_t v = 0, f = 0;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("v ", 0) == 0) ++v;
    if (line.rfind("f ", 0) == 0) ++f;
  }
  EXPECT_EQ(v, 12u * 24u + 2u);
  EXPECT_GT(f, 0u);
}

TEST(Surface, ValidationErrors) {
  SphereParam p = build_round_sphere(Vec3::Zero(), 0.1, 8, 24, 48);
  p.coeffs[1].pop_back();
  EXPECT_THROW(p.validate(), ValidationError);
  EXPECT_THROW(build_round_sphere(Vec3::Zero(), 0.1, 16, 12, 24), ValidationError);
  // Collapsed surface is not an immersion.
  SphereParam flat = build_round_sphere(Vec3::Zero(), 0.1, 8, 24, 48);
  std::fill(flat.coeffs[0].begin(), flat.coeffs[0].end(), 0.0);
  std::fill(flat.coeffs[2].begin(), flat.coeffs[2].end(), 0.0);
  EXPECT_THROW(geometry(flat, make_flat(1.0)), ImmersionError);
}
