#include "willmore/optimize.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Degree preconditioner for the scaled coefficients: the Hessian of W grows
// roughly like l^4 on degree-l shape modes.
double degree_weight(int l) {
  const double e = l * (l + 1) - 2.0;
  return l <= 1 ? 1.0 : 1.0 / (1.0 + e * e / 16.0);
}

struct Evaluation {
  bool ok = false;
  bool positive_H = false;
  double phi = 0.0;
  double W = 0.0;
  double area = 0.0;
  double lambda_lsq = 0.0;
  double residual = 0.0;
  double stationarity = 0.0;  ///< ||EL - m H|| * area with the current multiplier term m
  VectorXd grad;
  MatrixXd center_grad;  ///< y-gradients of aE, frozen-center mode only
};

class Problem {
 public:
  Problem(const MetricModel& model, const SphereParam& init, const OptimizeOptions& opts)
      : model_(model), opts_(opts), base_(init) {
    band_ = init.band_limit;
    count_ = sh_count(band_);
    scale_ = std::sqrt(opts.area_target / (4.0 * kPi));
    weight_.resize(3 * count_);
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < count_; ++k) weight_[c * count_ + k] = scale_ * degree_weight(sh_degree(k));
  }

  int size() const { return 3 * count_; }

  VectorXd to_vector(const SphereParam& p) const {
    VectorXd y(size());
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < count_; ++k) y[c * count_ + k] = p.coeffs[c][k] / weight_[c * count_ + k];
    return y;
  }

  SphereParam to_param(const VectorXd& y) const {
    SphereParam p = base_;
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < count_; ++k) p.coeffs[c][k] = y[c * count_ + k] * weight_[c * count_ + k];
    return p;
  }

  double multiplier_term(double alpha) const { return (mu_ + kappa_ * (alpha - 1.0)) / opts_.area_target; }

  Evaluation evaluate(const VectorXd& y, bool with_gradient = true) const {
    Evaluation e;
    const SphereParam p = to_param(y);
    std::optional<SurfaceGeometry> geom;
    try {
      geom.emplace(geometry(p, model_));
    } catch (const ImmersionError&) {
      return e;
    } catch (const DomainError&) {
      return e;
    }
    e.positive_H = geom->min_H() > 0.0;
    e.area = geom->area();
    e.W = 0.5 * geom->integrate([](const NodeGeometry& n) { return n.H * n.H; });
    const double alpha = e.area / opts_.area_target;
    e.phi = e.W + mu_ * (alpha - 1.0) + 0.5 * kappa_ * (alpha - 1.0) * (alpha - 1.0);
    if (!std::isfinite(e.phi)) return e;
    e.ok = true;

    const std::vector<double> el = euler_lagrange_operator(*geom);
    // With a frozen center the constraint forces are the normal-speed
    // densities q_i of d aE_i; residuals are measured modulo their span.
    const int extra = opts_.freeze_center ? 3 : 0;
    const Eigen::Index nodes = static_cast<Eigen::Index>(geom->size());
    MatrixXd basis(nodes, 1 + extra);
    VectorXd target(nodes);
    Vec3 aE = Vec3::Zero();
    if (extra > 0) {
      for (const auto& nd : geom->nodes()) aE += nd.F * nd.dmuE;
      aE /= geom->area_euclid();
    }
    for (Eigen::Index n = 0; n < nodes; ++n) {
      const auto& nd = geom->node(static_cast<std::size_t>(n));
      const double w = std::sqrt(nd.dmu);
      basis(n, 0) = nd.H * w;
      if (extra > 0) {
        const double speed = nd.nu.dot(nd.nuE) * nd.dmuE / (nd.dmu * geom->area_euclid());
        const Vec3 q = speed * (nd.nuE + (nd.F - aE) * nd.HE);
        for (int c = 0; c < 3; ++c) basis(n, 1 + c) = q[c] * w;
      }
      target[n] = el[static_cast<std::size_t>(n)] * w;
    }
    const VectorXd coef = basis.colPivHouseholderQr().solve(target);
    e.lambda_lsq = -coef[0];
    e.residual = (target - basis * coef).norm();
    if (!with_gradient) return e;

    const SphericalGrid& grid = geom->grid();
    const double m = multiplier_term(alpha);
    VectorXd moved = target - m * basis.col(0);
    if (extra > 0) {
      const MatrixXd t = basis.rightCols(extra);
      moved -= t * t.colPivHouseholderQr().solve(moved);
    }
    e.stationarity = moved.norm() * e.area;
    auto assemble = [&](const std::function<double(std::size_t)>& density) {
      VectorXd out(size());
      std::vector<double> v(geom->size());
      for (int c = 0; c < 3; ++c) {
        for (std::size_t n = 0; n < geom->size(); ++n) {
          const auto& nd = geom->node(n);
          const int i = static_cast<int>(n) / grid.n_phi();
          v[n] = density(n) * nd.nu_lower[c] * nd.dmu / grid.sphere_weight(i);
        }
        const std::vector<double> gc = grid.analyze(v, band_);
        for (int k = 0; k < count_; ++k) out[c * count_ + k] = gc[k] * weight_[c * count_ + k];
      }
      return out;
    };
    e.grad = assemble([&](std::size_t n) { return -el[n] + m * geom->node(n).H; });
    if (extra > 0) {
      e.center_grad.resize(size(), 3);
      for (int c = 0; c < 3; ++c)
        e.center_grad.col(c) = assemble([&, c](std::size_t n) {
          return basis(static_cast<Eigen::Index>(n), 1 + c) / std::sqrt(geom->node(n).dmu);
        });
    }
    return e;
  }

  // Removes rigid-rotation directions (pure reparameterization on the
  // round sphere) and, with a frozen center, first-order changes of aE.
  VectorXd project_step(const VectorXd& y, const VectorXd& step, const MatrixXd& center_grad) const {
    MatrixXd R(size(), 3 + center_grad.cols());
    for (int j = 0; j < 3; ++j) {
      const Vec3 axis = Vec3::Unit(j);
      for (int k = 0; k < count_; ++k) {
        const Vec3 c(y[k] * weight_[k], y[count_ + k] * weight_[count_ + k],
                     y[2 * count_ + k] * weight_[2 * count_ + k]);
        const Vec3 r = axis.cross(c);
        for (int d = 0; d < 3; ++d) R(d * count_ + k, j) = r[d] / weight_[d * count_ + k];
      }
    }
    if (center_grad.cols() > 0) R.rightCols(center_grad.cols()) = center_grad;
    VectorXd out = step;
    const Eigen::ColPivHouseholderQR<MatrixXd> qr(R);
    if (qr.rank() == 0) return out;
    const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(size(), qr.rank());
    out -= Q * (Q.transpose() * out);
    return out;
  }

  /// Euclidean center of gravity of the surface at y.
  Vec3 center(const VectorXd& y) const { return sphere_fit(geometry(to_param(y), model_)).aE; }

  /// Pins aE to the frozen center by a rigid translation.
  VectorXd recenter(const VectorXd& y) const {
    if (!opts_.freeze_center) return y;
    return translate(y, center0_ - center(y));
  }

  Vec3 center0_ = Vec3::Zero();

  /// Rigid translation of the surface at y by `shift`.
  VectorXd translate(VectorXd y, const Vec3& shift) const {
    const double s = std::sqrt(4.0 * kPi);
    for (int c = 0; c < 3; ++c) y[c * count_] += shift[c] * s / weight_[c * count_];
    return y;
  }

  double mu_ = 0.0;
  double kappa_ = 0.0;

 private:
  const MetricModel& model_;
  const OptimizeOptions& opts_;
  SphereParam base_;
  int band_ = 0;
  int count_ = 0;
  double scale_ = 1.0;
  std::vector<double> weight_;
};

// Richardson-extrapolated central difference along the unit gradient direction.
double gradient_check(const Problem& prob, const VectorXd& y, const Evaluation& e) {
  const double gnorm = e.grad.norm();
  if (!(gnorm > 0.0)) return 0.0;
  const VectorXd d = e.grad / gnorm;
  auto central = [&](double h) {
    const Evaluation p = prob.evaluate(y + h * d, false), m = prob.evaluate(y - h * d, false);
    if (!p.ok || !m.ok) throw NumericalError("gradient check left the admissible set");
    return (p.phi - m.phi) / (2.0 * h);
  };
  const double h = 1e-4;
  const double fd = (4.0 * central(h / 2) - central(h)) / 3.0;
  // Below 1e-6 (1 + |phi|) both sides are rounding noise of phi.
  return std::abs(fd - gnorm) / std::max({std::abs(fd), gnorm, 1e-6 * (1.0 + std::abs(e.phi))});
}

}  // namespace

void OptimizeOptions::validate(const MetricModel& model) const {
  if (!(area_target > 0.0)) throw ValidationError("optimizer.area_target must be positive");
  if (max_outer < 1 || max_inner < 1) throw ValidationError("optimizer.max_outer and max_inner must be >= 1");
  if (!(el_tol > 0.0)) throw ValidationError("optimizer.el_tol must be positive");
  if (!(area_tol > 0.0)) throw ValidationError("optimizer.area_tol must be positive");
  if (!(penalty0 > 0.0)) throw ValidationError("optimizer.penalty0 must be positive");
  if (!(step0 > 0.0)) throw ValidationError("optimizer.step0 must be positive");
  if (!(std::sqrt(area_target / (4.0 * kPi)) < 0.5 * model.rho))
    throw ValidationError("optimizer.area_target: sqrt(a / 4 pi) must be below rho / 2");
}

MultiplierResult extract_multiplier(const SurfaceGeometry& geom, const MetricModel& /*model*/) {
  if (!(geom.min_H() > 0.0)) throw HypothesisViolation("multiplier extraction needs H > 0");
  const MultiplierEstimate est = estimate_multiplier(geom);
  return {est.lambda_lsq, est.residual, est.lambda_id};
}

SphereParam default_initial_surface(double area_target, int band_limit, int n_theta, int n_phi) {
  return build_round_sphere(Vec3::Zero(), std::sqrt(area_target / (4.0 * kPi)), band_limit, n_theta, n_phi);
}

SolveResult solve(const MetricModel& model, const SphereParam& init, const OptimizeOptions& opts) {
  opts.validate(model);
  init.validate();
  const double a = opts.area_target;

  Problem prob(model, init, opts);
  VectorXd y = prob.to_vector(init);
  prob.center0_ = prob.center(y);

  {
    const SurfaceGeometry g0 = geometry(init, model);
    if (!(g0.min_H() > 0.0)) throw HypothesisViolation("initial surface has H <= 0 somewhere");
    const double ratio = g0.area() / a;
    if (!(ratio > 0.25 && ratio < 4.0)) throw ValidationError("initial area is not within a factor 4 of area_target");
    prob.mu_ = -estimate_multiplier(g0).lambda_lsq * a;
  }
  prob.kappa_ = opts.penalty0;

  SolveResult result;
  Evaluation cur = prob.evaluate(y);
  if (!cur.ok) throw NumericalError("initial surface could not be evaluated");
  result.gradient_check = gradient_check(prob, y, cur);
  if (result.gradient_check > 1e-4)
    throw NumericalError("analytic shape gradient disagrees with finite differences");

  const int n = prob.size();
  int iter = 0;
  // The first round only sets the multiplier; penalty growth starts after it.
  double prev_violation = std::numeric_limits<double>::infinity();
  auto record = [&](const Evaluation& e) {
    result.history.push_back({iter, e.W, e.area, e.residual, -prob.multiplier_term(e.area / a)});
  };
  record(cur);

  // Distance from convergence; <= 1 means both tolerances hold.
  auto score = [&](const Evaluation& e) {
    return std::max(std::abs(e.area / a - 1.0) / opts.area_tol, e.residual * e.area / opts.el_tol);
  };
  VectorXd best_y = y;
  double best_score = score(cur);

  MatrixXd Hinv = MatrixXd::Identity(n, n) * opts.step0;
  bool scaled = false;
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    result.outer_rounds = outer + 1;
    cur = prob.evaluate(y);
    const double round_start = cur.stationarity;
    bool stalled = false;
    for (int inner = 0; inner < opts.max_inner; ++inner) {
      if (cur.stationarity <= 0.25 * opts.el_tol) break;
      if (!(prob.project_step(y, cur.grad, cur.center_grad).norm() > 0.0)) break;
      VectorXd d = prob.project_step(y, -Hinv * cur.grad, cur.center_grad);
      double slope = cur.grad.dot(d);
      if (!(slope < 0.0)) {
        Hinv = MatrixXd::Identity(n, n) * opts.step0;
        d = prob.project_step(y, -opts.step0 * cur.grad, cur.center_grad);
        slope = cur.grad.dot(d);
        if (!(slope < 0.0)) break;
      }
      double t = 1.0;
      Evaluation trial;
      VectorXd y_trial;
      bool accepted = false;
      for (int bt = 0; bt < 50; ++bt, t *= 0.5) {
        try {
          y_trial = prob.recenter(y + t * d);
        } catch (const Error&) {
          continue;
        }
        trial = prob.evaluate(y_trial);
        if (!trial.ok || !trial.positive_H) continue;
        // Near the optimum phi is flat to rounding; fall back to stationarity.
        const bool armijo = trial.phi <= cur.phi + 1e-4 * t * slope;
        const bool flat = trial.phi <= cur.phi + 1e-13 * std::abs(cur.phi) && trial.stationarity < cur.stationarity;
        if (armijo || flat) {
          accepted = true;
          break;
        }
      }
      if (!accepted) {
        stalled = true;
        break;
      }
      const VectorXd s = y_trial - y;
      const VectorXd dg = trial.grad - cur.grad;
      y = y_trial;
      const double sy = s.dot(dg);
      if (sy > 1e-300) {
        if (!scaled) {
          Hinv = MatrixXd::Identity(n, n) * (sy / dg.squaredNorm());
          scaled = true;
        }
        const double rho = 1.0 / sy;
        const VectorXd Hy = Hinv * dg;
        Hinv += (rho * rho * dg.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
      }
      cur = trial;
      ++iter;
      ++result.inner_steps;
      record(cur);
      if (cur.positive_H && score(cur) < best_score) {
        best_score = score(cur);
        best_y = y;
      }
      if (best_score <= 1.0) break;
    }
    if (best_score <= 1.0) {
      result.converged = true;
      y = best_y;
      break;
    }

    const double violation = std::abs(cur.area / a - 1.0);
    const double scaled_residual = cur.residual * cur.area;
    if (violation <= opts.area_tol && scaled_residual <= opts.el_tol && cur.positive_H) {
      result.converged = true;
      break;
    }
    // Descent that stalls short of stationarity usually means tangential
    // distortion of the parameterization; re-fit as a radial graph. Nearly
    // stationary iterates are left alone so symmetric solutions stay exact.
    const bool slow = cur.stationarity > 0.25 * opts.el_tol && cur.stationarity > 0.5 * round_start;
    const bool distorted = cur.residual * cur.area > 100.0 * opts.el_tol;
    if ((stalled || slow) && distorted) {
      try {
        SphereParam current = prob.to_param(y);
        current = radial_reparameterization(current, sphere_fit(geometry(current, model)).aE);
        const VectorXd y2 = prob.to_vector(current);
        const Evaluation e2 = prob.evaluate(y2);
        if (e2.ok && e2.positive_H) {
          y = y2;
          Hinv = MatrixXd::Identity(n, n) * opts.step0;
          scaled = false;
          ++result.reparameterizations;
        }
      } catch (const NumericalError&) {
      }
    }
    prob.mu_ += prob.kappa_ * (cur.area / a - 1.0);
    if (violation > opts.area_tol && violation > 0.25 * prev_violation) {
      prob.kappa_ *= 10.0;
      Hinv = MatrixXd::Identity(n, n) * opts.step0;
      scaled = false;
    }
    prev_violation = violation;
  }

  if (!result.converged) y = best_y;
  result.surface = prob.to_param(y);
  const SurfaceGeometry geom = geometry(result.surface, model);
  if (!(geom.min_H() > 0.0)) throw HypothesisViolation("final surface has H <= 0 somewhere");
  const MultiplierResult mult = extract_multiplier(geom, model);
  result.lambda = mult.lambda;
  result.lambda_id = mult.lambda_id;
  result.report = evaluate(geom, model);
  const Evaluation fin = prob.evaluate(y, false);
  result.residual_scaled = fin.residual * fin.area;
  if (result.converged) {
    const bool ok = result.residual_scaled <= opts.el_tol &&
                    std::abs(result.report.area - a) <= opts.area_tol * a && result.report.min_H > 0.0;
    if (!ok) throw NumericalError("converged solve failed its post-condition");
  }
  return result;
}

DriftResult drift_experiment(const MetricModel& model, const SphereParam& init, const OptimizeOptions& opts) {
  DriftResult out;
  OptimizeOptions frozen = opts, free = opts;
  frozen.freeze_center = true;
  free.freeze_center = false;
  out.frozen = solve(model, init, frozen);
  out.free = solve(model, init, free);
  out.drift = out.free.report.fit.aE - out.frozen.report.fit.aE;
  const Vec3 s = model.grad_scal0();
  if (s.norm() > 0.0) out.drift_along_gradient = out.drift.dot(s) / s.norm();
  return out;
}

}  // namespace willmore
