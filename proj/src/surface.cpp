#include "willmore/surface.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "willmore/errors.hpp"
#include "willmore/parallel.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Number of theta indices among a parameter multi-index (0 = theta, 1 = phi).
int theta_count(std::initializer_list<int> idx) {
  int c = 0;
  for (int a : idx) c += a == 0 ? 1 : 0;
  return c;
}

double frob2(const Mat2& gi, const Mat2& t) {
  // |T|^2 = gamma^ac gamma^bd T_ab T_cd
  return (gi * t * gi * t.transpose()).trace();
}

}  // namespace

void SphereParam::validate() const {
  if (band_limit < 1) throw ValidationError("surface.band_limit: must be >= 1");
  if (n_phi < 2 * band_limit + 2) throw ValidationError("surface.n_phi: must be >= 2 * band_limit + 2");
  if (n_theta < band_limit + 1) throw ValidationError("surface.n_theta: must be >= band_limit + 1");
  for (int c = 0; c < 3; ++c) {
    if (static_cast<int>(coeffs[c].size()) != sh_count(band_limit))
      throw ValidationError("surface.coeffs: coordinate " + std::to_string(c) + " must hold (L+1)^2 values");
    for (double v : coeffs[c])
      if (!std::isfinite(v)) throw ValidationError("surface.coeffs: non-finite coefficient");
  }
}

SphereParam build_round_sphere(const Vec3& center, double radius, int band_limit, int n_theta, int n_phi,
                               double rho) {
  if (!(radius > 0.0)) throw ValidationError("surface.radius: must be positive");
  if (!(center.norm() + radius < rho)) throw DomainError("round sphere leaves B_rho");
  SphereParam p;
  p.band_limit = band_limit;
  p.n_theta = n_theta;
  p.n_phi = n_phi;
  for (auto& c : p.coeffs) c.assign(sh_count(band_limit), 0.0);
  const double y0 = std::sqrt(4.0 * kPi);
  const double y1 = radius * std::sqrt(4.0 * kPi / 3.0);
  for (int c = 0; c < 3; ++c) p.coeffs[c][sh_index(0, 0)] = center[c] * y0;
  p.coeffs[0][sh_index(1, 1)] = y1;   // sin t cos p
  p.coeffs[1][sh_index(1, -1)] = y1;  // sin t sin p
  p.coeffs[2][sh_index(1, 0)] = y1;   // cos t
  p.validate();
  return p;
}

SphereParam build_ellipsoid(const Vec3& center, const Vec3& semiaxes, int band_limit, int n_theta, int n_phi) {
  if (!(semiaxes.minCoeff() > 0.0)) throw ValidationError("surface.semiaxes: must be positive");
  SphereParam p = build_round_sphere(center, 1.0, band_limit, n_theta, n_phi);
  p.coeffs[0][sh_index(1, 1)] *= semiaxes[0];
  p.coeffs[1][sh_index(1, -1)] *= semiaxes[1];
  p.coeffs[2][sh_index(1, 0)] *= semiaxes[2];
  return p;
}

SphereParam build_perturbed_sphere(const Vec3& center, double radius, double amplitude, int max_degree,
                                   unsigned seed, int band_limit, int n_theta, int n_phi) {
  SphereParam p = build_round_sphere(center, radius, band_limit, n_theta, n_phi);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int top = std::min(max_degree, band_limit);
  for (int c = 0; c < 3; ++c) {
    std::vector<double> pert(sh_count(band_limit), 0.0);
    double norm2 = 0.0;
    for (int l = 2; l <= top; ++l)
      for (int m = -l; m <= l; ++m) {
        const double v = normal(rng) / (l * l);
        pert[sh_index(l, m)] = v;
        norm2 += v * v;
      }
    if (norm2 == 0.0) continue;
    const double scale = amplitude * radius * std::sqrt(4.0 * kPi / norm2);
    for (std::size_t i = 0; i < pert.size(); ++i) p.coeffs[c][i] += scale * pert[i];
  }
  return p;
}

SphereParam translated(const SphereParam& param, const Vec3& shift) {
  SphereParam p = param;
  for (int c = 0; c < 3; ++c) p.coeffs[c][sh_index(0, 0)] += shift[c] * std::sqrt(4.0 * kPi);
  return p;
}

SphereParam scaled(const SphereParam& param, double factor) {
  SphereParam p = param;
  for (auto& c : p.coeffs)
    for (double& v : c) v *= factor;
  return p;
}

SphereParam resampled(const SphereParam& param, int band_limit, int n_theta, int n_phi) {
  SphereParam p;
  p.band_limit = band_limit;
  p.n_theta = n_theta;
  p.n_phi = n_phi;
  for (int c = 0; c < 3; ++c) {
    p.coeffs[c].assign(sh_count(band_limit), 0.0);
    const std::size_t n = std::min(p.coeffs[c].size(), param.coeffs[c].size());
    for (std::size_t i = 0; i < n; ++i) p.coeffs[c][i] = param.coeffs[c][i];
  }
  p.validate();
  return p;
}

Vec3 evaluate_point(const SphereParam& param, double theta, double phi) {
  return {evaluate_expansion(param.coeffs[0], theta, phi), evaluate_expansion(param.coeffs[1], theta, phi),
          evaluate_expansion(param.coeffs[2], theta, phi)};
}

SphereParam radial_reparameterization(const SphereParam& param, const Vec3& center) {
  param.validate();
  const auto grid = param.grid();
  const int N = grid->size();
  std::vector<Vec3> dir(N), pts(N);
  for (int i = 0; i < grid->n_theta(); ++i)
    for (int j = 0; j < grid->n_phi(); ++j) {
      const int n = grid->node(i, j);
      dir[n] = Vec3(grid->sin_theta(i) * std::cos(grid->phi(j)), grid->sin_theta(i) * std::sin(grid->phi(j)),
                    grid->cos_theta(i));
    }
  std::array<std::vector<double>, 3> x;
  for (int c = 0; c < 3; ++c) x[c] = grid->synthesize(param.coeffs[c]);
  for (int n = 0; n < N; ++n) pts[n] = (Vec3(x[0][n], x[1][n], x[2][n]) - center).normalized();

  auto eval = [&](double t, double p, int dt, int dp) {
    return Vec3(evaluate_expansion(param.coeffs[0], t, p, dt, dp), evaluate_expansion(param.coeffs[1], t, p, dt, dp),
                evaluate_expansion(param.coeffs[2], t, p, dt, dp));
  };

  std::vector<double> radius(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t n) {
    const Vec3& u = dir[n];
    int best = 0;
    for (int k = 1; k < N; ++k)
      if (pts[k].dot(u) > pts[best].dot(u)) best = k;
    double t = grid->theta(best / grid->n_phi()), p = grid->phi(best % grid->n_phi());
    double R = (eval(t, p, 0, 0) - center).norm();
    const double tol = 1e-14 * (1.0 + R);
    bool done = false;
    for (int it = 0; it < 50 && !done; ++it) {
      const Vec3 G = eval(t, p, 0, 0) - center - R * u;
      Mat3 J;
      J.col(0) = eval(t, p, 1, 0);
      J.col(1) = eval(t, p, 0, 1);
      J.col(2) = -u;
      const Vec3 step = J.fullPivLu().solve(-G);
      t += step[0];
      p += step[1];
      R += step[2];
      if (t < 0.0) t = -t, p += kPi;
      if (t > kPi) t = 2.0 * kPi - t, p += kPi;
      done = G.norm() <= tol && step.norm() <= 1e-12;
    }
    if (!done || !(R > 0.0)) throw NumericalError("radial reparameterization: ray does not meet the surface");
    radius[n] = R;
  });

  SphereParam out = param;
  std::vector<double> v(N);
  for (int c = 0; c < 3; ++c) {
    for (int n = 0; n < N; ++n) v[n] = center[c] + radius[n] * dir[n][c];
    out.coeffs[c] = grid->analyze(v, param.band_limit);
  }
  return out;
}

SurfaceGeometry::SurfaceGeometry(std::shared_ptr<const SphericalGrid> grid, std::vector<NodeGeometry> nodes)
    : grid_(std::move(grid)), nodes_(std::move(nodes)) {
  for (const auto& n : nodes_) {
    area_ += n.dmu;
    area_euclid_ += n.dmuE;
  }
}

double SurfaceGeometry::min_H() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& n : nodes_) m = std::min(m, n.H);
  return m;
}

double SurfaceGeometry::integrate(std::span<const double> f) const {
  if (f.size() != nodes_.size()) throw ShapeError("field size does not match the surface grid");
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) s += f[i] * nodes_[i].dmu;
  return s;
}

double SurfaceGeometry::integrate(const std::function<double(const NodeGeometry&)>& f) const {
  double s = 0.0;
  for (const auto& n : nodes_) s += f(n) * n.dmu;
  return s;
}

double SurfaceGeometry::integrate_euclid(const std::function<double(const NodeGeometry&)>& f) const {
  double s = 0.0;
  for (const auto& n : nodes_) s += f(n) * n.dmuE;
  return s;
}

SurfaceGeometry geometry(const SphereParam& param, const MetricModel& model) {
  param.validate();
  auto grid = param.grid();
  // parameter derivatives, indexed by (#theta, #phi)
  struct Combo {
    int dt, dp;
  };
  const Combo combos[] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}};
  std::array<std::array<std::vector<double>, 3>, 10> deriv;
  for (int k = 0; k < 10; ++k)
    for (int c = 0; c < 3; ++c) deriv[k][c] = grid->synthesize(param.coeffs[c], combos[k].dt, combos[k].dp);
  auto combo_index = [](int dt, int dp) {
    const int order = dt + dp;
    const int base = order == 0 ? 0 : order == 1 ? 1 : order == 2 ? 3 : 6;
    return base + dp;
  };

  std::vector<NodeGeometry> nodes(grid->size());
  parallel_for(nodes.size(), [&](std::size_t idx) {
    const int i = static_cast<int>(idx) / grid->n_phi();
    auto vec = [&](int dt, int dp) {
      const auto& d = deriv[combo_index(dt, dp)];
      return Vec3(d[0][idx], d[1][idx], d[2][idx]);
    };
    Vec3 F1[2], F2[2][2], F3[2][2][2];
    for (int a = 0; a < 2; ++a) {
      F1[a] = vec(a == 0, a == 1);
      for (int b = 0; b < 2; ++b) {
        const int t2 = theta_count({a, b});
        F2[a][b] = vec(t2, 2 - t2);
        for (int c = 0; c < 2; ++c) {
          const int t3 = theta_count({a, b, c});
          F3[a][b][c] = vec(t3, 3 - t3);
        }
      }
    }

    NodeGeometry& n = nodes[idx];
    n.F = vec(0, 0);
    n.dF = {F1[0], F1[1]};
    const CurvatureBundle cb = curvature_no_gradient(model, n.F);
    n.g = cb.g;
    n.g_inv = cb.g_inv;
    n.ambient_gamma = cb.gamma;
    n.ric = cb.ric;
    n.scal = cb.scal;
    n.einstein = cb.einstein;

    // first fundamental form and its derivatives
    Mat3 Dg[2];
    for (int c = 0; c < 2; ++c) {
      Dg[c].setZero();
      for (int k = 0; k < 3; ++k) Dg[c] += F1[c][k] * cb.dg[k];
    }
    Mat3 D2g[2][2];
    for (int c = 0; c < 2; ++c)
      for (int d = 0; d < 2; ++d) {
        D2g[c][d].setZero();
        for (int k = 0; k < 3; ++k) {
          D2g[c][d] += F2[c][d][k] * cb.dg[k];
          for (int l = 0; l < 3; ++l) D2g[c][d] += F1[c][k] * F1[d][l] * cb.d2g[k][l];
        }
      }
    const Mat3& g = cb.g;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        n.gamma(a, b) = F1[a].dot(g * F1[b]);
        for (int c = 0; c < 2; ++c)
          n.dgamma[c](a, b) = F1[a].dot(Dg[c] * F1[b]) + F2[a][c].dot(g * F1[b]) + F1[a].dot(g * F2[b][c]);
      }
    n.gamma = 0.5 * (n.gamma + n.gamma.transpose()).eval();
    const double det = n.gamma.determinant();
    if (!(det > 0.0)) throw ImmersionError("det(gamma) <= 0 at node " + std::to_string(idx));
    n.gamma_inv = n.gamma.inverse();
    n.sqrt_det = std::sqrt(det);

    // surface Christoffels
    for (int c = 0; c < 2; ++c)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          double v = 0.0;
          for (int d = 0; d < 2; ++d)
            v += n.gamma_inv(c, d) * (n.dgamma[a](b, d) + n.dgamma[b](a, d) - n.dgamma[d](a, b));
          n.surface_gamma[c](a, b) = 0.5 * v;
        }

    // second derivatives of gamma, d2gamma[c][d](a,b) = d_d d_c gamma_ab
    auto d2gamma = [&](int c, int d, int a, int b) {
      return F1[a].dot(D2g[c][d] * F1[b]) + F2[a][d].dot(Dg[c] * F1[b]) + F1[a].dot(Dg[c] * F2[b][d]) +
             F2[a][c].dot(Dg[d] * F1[b]) + F1[a].dot(Dg[d] * F2[b][c]) + F3[a][c][d].dot(g * F1[b]) +
             F2[a][c].dot(g * F2[b][d]) + F2[a][d].dot(g * F2[b][c]) + F1[a].dot(g * F3[b][c][d]);
    };
    {
      const auto& G = n.surface_gamma;
      // R_1212 with 1 = theta, 2 = phi
      double r1212 = 0.5 * (d2gamma(1, 0, 0, 1) + d2gamma(0, 1, 1, 0) - d2gamma(1, 1, 0, 0) - d2gamma(0, 0, 1, 1));
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) r1212 += n.gamma(p, q) * (G[p](1, 0) * G[q](0, 1) - G[p](1, 1) * G[q](0, 0));
      n.sigma_scal = 2.0 * r1212 / det;
    }

    // normals
    n.normal_euclid = F1[0].cross(F1[1]);
    const double en = n.normal_euclid.norm();
    if (!(en > 0.0)) throw ImmersionError("degenerate tangent plane at node " + std::to_string(idx));
    const Vec3 raised = cb.g_inv * n.normal_euclid;
    const double gn = std::sqrt(n.normal_euclid.dot(raised));
    n.nu = raised / gn;
    n.nu_lower = n.normal_euclid / gn;
    n.nuE = n.normal_euclid / en;

    // second fundamental forms
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec3 cov = F2[a][b];
        for (int k = 0; k < 3; ++k) cov[k] += F1[a].dot(cb.gamma[k] * F1[b]);
        n.A(a, b) = -cov.dot(n.nu_lower);
        n.AE(a, b) = -F2[a][b].dot(n.nuE);
        n.gammaE(a, b) = F1[a].dot(F1[b]);
      }
    n.A = 0.5 * (n.A + n.A.transpose()).eval();
    n.AE = 0.5 * (n.AE + n.AE.transpose()).eval();
    n.H = (n.gamma_inv.cwiseProduct(n.A)).sum();
    n.Aring = n.A - 0.5 * n.H * n.gamma;
    n.aring_sq = frob2(n.gamma_inv, n.Aring);
    const Mat2 giE = n.gammaE.inverse();
    n.HE = (giE.cwiseProduct(n.AE)).sum();
    n.AringE = n.AE - 0.5 * n.HE * n.gammaE;
    n.aringE_sq = frob2(giE, n.AringE);

    // ambient curvature seen from the surface
    n.ric_nn = n.nu.dot(cb.ric * n.nu);
    n.einstein_nn = n.nu.dot(cb.einstein * n.nu);
    for (int a = 0; a < 2; ++a) {
      n.omega[a] = n.nu.dot(cb.ric * F1[a]);
      for (int b = 0; b < 2; ++b) {
        n.ric_tan(a, b) = F1[a].dot(cb.ric * F1[b]);
        n.einstein_tan(a, b) = F1[a].dot(cb.einstein * F1[b]);
      }
    }

    const double pw = grid->param_weight(i);
    n.dmu = pw * n.sqrt_det;
    n.dmuE = pw * en;
  });
  return SurfaceGeometry(grid, std::move(nodes));
}

ScalarDerivatives surface_derivatives(const SurfaceGeometry& geom, std::span<const double> field) {
  const SphericalGrid& grid = geom.grid();
  if (field.size() != geom.size()) throw ShapeError("field size does not match the surface grid");
  const std::vector<double> c = grid.analyze(field, grid.transform_band());
  const auto ut = grid.synthesize(c, 1, 0), up = grid.synthesize(c, 0, 1);
  const auto utt = grid.synthesize(c, 2, 0), utp = grid.synthesize(c, 1, 1), upp = grid.synthesize(c, 0, 2);
  ScalarDerivatives out;
  out.grad.resize(geom.size());
  out.hess.resize(geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) {
    const Vec2 grad(ut[n], up[n]);
    Mat2 h;
    h << utt[n], utp[n], utp[n], upp[n];
    const auto& G = geom.node(n).surface_gamma;
    h -= grad[0] * G[0] + grad[1] * G[1];
    out.grad[n] = grad;
    out.hess[n] = h;
  }
  return out;
}

std::vector<double> laplace_beltrami(const SurfaceGeometry& geom, std::span<const double> field) {
  const ScalarDerivatives d = surface_derivatives(geom, field);
  std::vector<double> out(geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) out[n] = (geom.node(n).gamma_inv.cwiseProduct(d.hess[n])).sum();
  return out;
}

std::vector<double> intrinsic_scalar_curvature(const SurfaceGeometry& geom) {
  std::vector<double> out(geom.size());
  for (std::size_t n = 0; n < geom.size(); ++n) out[n] = geom.node(n).sigma_scal;
  return out;
}

VectorFieldEvaluator position_field() {
  return {[](const Vec3& x) { return x; }, [](const Vec3&) { return Mat3(Mat3::Identity()); }};
}

VectorFieldEvaluator constant_field(const Vec3& b) {
  return {[b](const Vec3&) { return b; }, [](const Vec3&) { return Mat3(Mat3::Zero()); }};
}

DivergenceIntegrals divergence_integrals(const SurfaceGeometry& geom, const VectorFieldEvaluator& field) {
  DivergenceIntegrals out;
  for (const auto& n : geom.nodes()) {
    const Vec3 X = field.value(n.F);
    const Mat3 J = field.jacobian(n.F);
    Vec3 cov[2];
    for (int a = 0; a < 2; ++a) {
      cov[a] = J * n.dF[a];
      for (int k = 0; k < 3; ++k) cov[a][k] += n.dF[a].dot(n.ambient_gamma[k] * X);
    }
    double div = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) div += n.gamma_inv(a, b) * cov[a].dot(n.g * n.dF[b]);
    out.divergence += div * n.dmu;
    out.normal_flux += n.H * X.dot(n.nu_lower) * n.dmu;
  }
  return out;
}

double tangential_divergence_check(const SurfaceGeometry& geom, const VectorFieldEvaluator& field) {
  const DivergenceIntegrals d = divergence_integrals(geom, field);
  return std::abs(d.divergence - d.normal_flux);
}

void write_obj(std::ostream& out, const SphereParam& param) {
  const auto grid = param.grid();
  const int nt = grid->n_theta(), np = grid->n_phi();
  out << "# willmore-lab surface, " << nt << "x" << np << " nodes\n";
  out.precision(17);
  const Vec3 north = evaluate_point(param, 0.0, 0.0);
  out << "v " << north[0] << ' ' << north[1] << ' ' << north[2] << '\n';
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      const Vec3 p = evaluate_point(param, grid->theta(i), grid->phi(j));
      out << "v " << p[0] << ' ' << p[1] << ' ' << p[2] << '\n';
    }
  const Vec3 south = evaluate_point(param, kPi, 0.0);
  out << "v " << south[0] << ' ' << south[1] << ' ' << south[2] << '\n';
  auto vid = [&](int i, int j) { return 2 + i * np + (j % np); };
  const int south_id = 2 + nt * np;
  for (int j = 0; j < np; ++j) out << "f 1 " << vid(0, j) << ' ' << vid(0, j + 1) << '\n';
  for (int i = 0; i + 1 < nt; ++i)
    for (int j = 0; j < np; ++j)
      out << "f " << vid(i, j) << ' ' << vid(i + 1, j) << ' ' << vid(i + 1, j + 1) << ' ' << vid(i, j + 1) << '\n';
  for (int j = 0; j < np; ++j) out << "f " << vid(nt - 1, j) << ' ' << south_id << ' ' << vid(nt - 1, j + 1) << '\n';
}

}  // namespace willmore
