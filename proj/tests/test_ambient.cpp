#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "willmore/ambient.hpp"
#include "willmore/errors.hpp"

using namespace willmore;

namespace {

// Space-form metric in normal coordinates written out independently of the
// library: g = P_r + (sn(s)/s)^2 (I - P_r).
Mat3 space_form_oracle(double k, const Vec3& x) {
  const double s = x.norm();
  const double sn = k > 0 ? std::sin(std::sqrt(k) * s) / std::sqrt(k)
                          : (k < 0 ? std::sinh(std::sqrt(-k) * s) / std::sqrt(-k) : s);
  const Mat3 P = x * x.transpose() / (s * s);
  return P + (sn * sn / (s * s)) * (Mat3::Identity() - P);
}

}  // namespace

TEST(Ambient, FlatIsIdentityWithZeroDerivatives) {
  const MetricModel m = make_flat(1.0);
  const MetricSample s = metric_at(m, Vec3(0.1, 0.0, 0.0));
  EXPECT_EQ((s.g - Mat3::Identity()).norm(), 0.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(s.dg[k].norm(), 0.0);
    for (int l = 0; l < 3; ++l) EXPECT_EQ(s.d2g[k][l].norm(), 0.0);
  }
  const CurvatureBundle c = curvature_at(m, Vec3(0.2, -0.1, 0.3));
  EXPECT_EQ(c.ric.norm(), 0.0);
  EXPECT_EQ(c.scal, 0.0);
  EXPECT_EQ(c.grad_scal.norm(), 0.0);
}

TEST(Ambient, SpaceFormOriginIsIdentity) {
  for (double k : {-1.0, 0.5, 2.0}) {
    const MetricSample s = metric_at(make_space_form(k, 1.0), Vec3::Zero());
    EXPECT_LT((s.g - Mat3::Identity()).norm(), 1e-15);
    for (int d = 0; d < 3; ++d) EXPECT_LT(s.dg[d].norm(), 1e-14);
  }
}

TEST(Ambient, SpaceFormTangentialComponents) {
  const MetricSample s = metric_at(make_space_form(1.0, 1.0), Vec3(0.2, 0.0, 0.0));
  const double expected = std::sin(0.2) * std::sin(0.2) / 0.04;
  EXPECT_NEAR(s.g(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(s.g(1, 1), expected, 1e-14);
  EXPECT_NEAR(s.g(2, 2), expected, 1e-14);
  EXPECT_NEAR(s.g(0, 1), 0.0, 1e-15);
}

TEST(Ambient, SpaceFormMatchesClosedFormAndDerivatives) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (double k : {-0.7, 0.5, 1.0}) {
    const MetricModel m = make_space_form(k, 1.0);
    for (int t = 0; t < 5; ++t) {
      const Vec3 x(u(rng), u(rng), u(rng));
      const MetricSample s = metric_at(m, x);
      EXPECT_LT((s.g - space_form_oracle(k, x)).norm(), 1e-13);
      // First derivatives against central differences of the oracle.
      const double h = 1e-6;
      for (int d = 0; d < 3; ++d) {
        const Vec3 e = Vec3::Unit(d) * h;
        const Mat3 fd = (space_form_oracle(k, x + e) - space_form_oracle(k, x - e)) / (2 * h);
        EXPECT_LT((s.dg[d] - fd).norm(), 1e-8);
      }
    }
  }
}

TEST(Ambient, SpaceFormRadialGauge) {
  const MetricModel m = make_space_form(1.0, 1.0);
  const Vec3 x(0.1, -0.2, 0.15);
  EXPECT_LT((metric_at(m, x).g * x - x).norm(), 1e-12);
}

TEST(Ambient, SpaceFormConstantCurvature) {
  const MetricModel m = make_space_form(0.5, 1.0);
  const CurvatureBundle c = curvature_at(m, Vec3(0.05, 0.02, 0.0));
  EXPECT_NEAR(c.scal, 3.0, 1e-6);
  EXPECT_LT((c.ric - 1.0 * c.g).norm(), 1e-6);
  EXPECT_LT((c.einstein - (c.ric - 0.5 * c.scal * c.g)).norm(), 1e-14);
  EXPECT_NEAR(m.scal0(), 3.0, 1e-12);
  EXPECT_LT((m.ricci0() - Mat3::Identity()).norm(), 1e-12);
}

TEST(Ambient, ScalarIsTraceOfRicci) {
  Mat3 ric;
  ric << 1.0, 0.3, 0.2, 0.3, 1.5, 0.1, 0.2, 0.1, 0.5;
  const MetricModel m = make_quadratic_curvature(ric, Vec3(1.0, -0.5, 0.2), 1.0);
  const CurvatureBundle c = curvature_at(m, Vec3(0.1, 0.05, -0.08));
  const double trace = (c.g_inv * c.ric).trace();
  EXPECT_NEAR(c.scal, trace, 1e-10 * std::abs(trace));
  EXPECT_LT((c.ric - c.ric.transpose()).norm(), 1e-13);
  EXPECT_LT((c.g - c.g.transpose()).norm(), 1e-15);
}

// ric0 = diag(1,2,3) has trace 6, so Scal(0) = 6.
TEST(Ambient, QuadraticCurvaturePrescription) {
  Mat3 ric = Mat3::Zero();
  ric.diagonal() << 1.0, 2.0, 3.0;
  const Vec3 s(0.7, 0.0, 0.0);
  const MetricModel m = make_quadratic_curvature(ric, s, 1.0);
  const CurvatureBundle c = curvature_at(m, Vec3::Zero());
  EXPECT_NEAR(c.scal, ric.trace(), 1e-12);
  EXPECT_LT((c.ric - ric).norm(), 1e-8);
  EXPECT_LT((c.grad_scal - s).norm(), 1e-4);
  // Normal coordinates: h(0) = 0, dh(0) = 0.
  const MetricSample o = metric_at(m, Vec3::Zero());
  EXPECT_LT((o.g - Mat3::Identity()).norm(), 1e-15);
  for (int d = 0; d < 3; ++d) EXPECT_LT(o.dg[d].norm(), 1e-15);
}

TEST(Ambient, RicciGradientAnsatzSatisfiesTraceAndBianchi) {
  const auto [alpha, beta] = ricci_gradient_ansatz();
  // trace: 3 alpha + 2 beta = 1; divergence: alpha + 4 beta = 1/2.
  EXPECT_NEAR(3 * alpha + 2 * beta, 1.0, 1e-14);
  EXPECT_NEAR(alpha + 4 * beta, 0.5, 1e-14);
  // Finite-difference Ricci derivative agrees with the ansatz at the origin.
  const Vec3 s(0.4, -0.3, 0.9);
  const MetricModel m = make_quadratic_curvature(Mat3::Identity(), s, 1.0);
  const double h = 1e-4;
  for (int q = 0; q < 3; ++q) {
    const Vec3 e = Vec3::Unit(q) * h;
    const Mat3 d = (curvature_at(m, e).ric - curvature_at(m, -e).ric) / (2 * h);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double expect = alpha * s[q] * (i == j) + beta * (s[i] * (j == q) + s[j] * (i == q));
        EXPECT_NEAR(d(i, j), expect, 1e-6);
      }
  }
}

TEST(Ambient, EinsteinDivergenceFreeInSpaceForm) {
  const MetricModel m = make_space_form(1.0, 1.0);
  const Vec3 x(0.1, 0.05, -0.07);
  const double h = 1e-5;
  // div G = g^{ab} nabla_a G_{bj}; with constant curvature G is a multiple of g.
  const CurvatureBundle c = curvature_at(m, x);
  Vec3 div = Vec3::Zero();
  for (int j = 0; j < 3; ++j) {
    double acc = 0.0;
    for (int a = 0; a < 3; ++a) {
      const Vec3 e = Vec3::Unit(a) * h;
      const Mat3 dG = (curvature_at(m, x + e).einstein - curvature_at(m, x - e).einstein) / (2 * h);
      for (int b = 0; b < 3; ++b) {
        double cov = dG(b, j);
        for (int l = 0; l < 3; ++l) cov -= c.gamma[l](a, b) * c.einstein(l, j) + c.gamma[l](a, j) * c.einstein(b, l);
        acc += c.g_inv(a, b) * cov;
      }
    }
    div[j] = acc;
  }
  EXPECT_LT(div.norm(), 1e-4 * (1.0 + c.ric.norm()));
}

TEST(Ambient, DeviationBoundIsFiniteAndDominatesSamples) {
  Mat3 ric = Mat3::Zero();
  ric.diagonal() << 1.0, 2.0, 3.0;
  for (const MetricModel& m : {make_space_form(1.0, 1.0), make_quadratic_curvature(ric, Vec3::Zero(), 1.0)}) {
    EXPECT_TRUE(std::isfinite(m.h0));
    EXPECT_GT(m.h0, 0.0);
    EXPECT_LE(deviation_quotient(m, Vec3(0.1, 0.2, -0.1)), m.h0 * (1 + 1e-12) + 1e-12);
  }
  EXPECT_EQ(make_flat(1.0).h0, 0.0);
}

TEST(Ambient, Errors) {
  EXPECT_THROW(metric_at(make_space_form(1.0, 0.5), Vec3(0.6, 0.0, 0.0)), DomainError);
  Mat3 bad = Mat3::Identity();
  bad(0, 1) = 0.2;
  EXPECT_THROW(make_quadratic_curvature(bad, Vec3::Zero(), 1.0), ValidationError);
  EXPECT_THROW(make_flat(-1.0), ValidationError);
  EXPECT_THROW(metric_kind_from_string("hyperbolic"), ValidationError);
  EXPECT_EQ(metric_kind_from_string(to_string(MetricKind::QuadraticCurvature)), MetricKind::QuadraticCurvature);
}
