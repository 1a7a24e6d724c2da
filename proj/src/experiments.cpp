#include "willmore/experiments.hpp"

#include <cmath>
#include <limits>

#include "willmore/errors.hpp"

namespace willmore {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Allowance for rounding on top of the resolution-doubling change.
double rounding_floor(double reference) { return 100.0 * kEps * std::abs(reference); }

struct Deficits {
  double D_W, D_lambda, D_ric, D_vol, hawking_ratio, D_hawking;
};

Deficits deficits(const FunctionalReport& rep, double lambda, double scal0) {
  Deficits d{};
  d.D_W = std::abs(rep.W - 8.0 * kPi + rep.area / 3.0 * scal0);
  d.D_lambda = std::abs(lambda + scal0 / 3.0);
  d.D_ric = std::abs(rep.ricci_avg - scal0 / 3.0);
  const double a32 = std::pow(rep.area, 1.5);
  d.D_vol = std::abs(rep.vol - a32 / (6.0 * std::sqrt(kPi))) / a32;
  d.hawking_ratio = rep.hawking / rep.vol;
  d.D_hawking = std::abs(d.hawking_ratio - scal0 / (16.0 * kPi));
  return d;
}

SphereParam centered_sphere(const MetricModel& model, double r, int L, int nt, int np) {
  return build_round_sphere(Vec3::Zero(), r, L, nt, np, model.rho);
}

}  // namespace

std::string to_string(SweepMode mode) { return mode == SweepMode::Minimizers ? "minimizers" : "geodesic_spheres"; }

SweepMode sweep_mode_from_string(const std::string& name) {
  if (name == "geodesic_spheres") return SweepMode::GeodesicSpheres;
  if (name == "minimizers") return SweepMode::Minimizers;
  throw ValidationError("sweep.mode: expected geodesic_spheres or minimizers, got '" + name + "'");
}

void SweepSpec::validate() const {
  if (radii.size() < 2) throw ValidationError("sweep.radii: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw ValidationError("sweep.radii: radii must be positive");
    if (!(radii[i] < 0.5 * model.rho)) throw ValidationError("sweep.radii: radii must be below rho / 2");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw ValidationError("sweep.radii: radii must be strictly descending");
  }
  if (band_limit < 1 || n_phi < 2 * band_limit + 2 || n_theta < band_limit + 1)
    throw ValidationError("sweep.band_limit: grid too small for the band limit");
}

const SlopeFit* ConvergenceTable::slope(const std::string& column) const {
  for (const auto& s : slopes)
    if (s.column == column) return &s;
  return nullptr;
}

SlopeFit fit_slope(const std::string& column, const std::vector<double>& r, const std::vector<double>& value,
                   const std::vector<double>& floor, const std::vector<bool>& use) {
  SlopeFit fit;
  fit.column = column;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!use[i]) continue;
    fit.max_deficit = std::max(fit.max_deficit, std::abs(value[i]));
    if (!(std::abs(value[i]) > 100.0 * floor[i])) {
      fit.floor_limited = true;
      continue;
    }
    x.push_back(std::log(r[i]));
    y.push_back(std::log(std::abs(value[i])));
  }
  fit.rows_used = static_cast<int>(x.size());
  if (x.size() < 2) return fit;
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - *fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.intercept + *fit.slope * x[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double geodesic_sphere_area(const MetricModel& model, double r, int band_limit, int n_theta, int n_phi) {
  return geometry(centered_sphere(model, r, band_limit, n_theta, n_phi), model).area();
}

double family_multiplier(const MetricModel& model, double r, int band_limit, int n_theta, int n_phi) {
  auto wa = [&](double radius) {
    const SurfaceGeometry g = geometry(centered_sphere(model, radius, band_limit, n_theta, n_phi), model);
    const double W = 0.5 * g.integrate([](const NodeGeometry& n) { return n.H * n.H; });
    return std::pair{W, g.area()};
  };
  auto central = [&](double h) {
    const auto [wp, ap] = wa(r + h);
    const auto [wm, am] = wa(r - h);
    return std::pair{(wp - wm) / (2.0 * h), (ap - am) / (2.0 * h)};
  };
  const double h = 1e-3 * r;
  const auto [w1, a1] = central(h);
  const auto [w2, a2] = central(0.5 * h);
  return ((4.0 * w2 - w1) / 3.0) / ((4.0 * a2 - a1) / 3.0);
}

ConvergenceTable sweep(const SweepSpec& spec) {
  spec.validate();
  const double scal0 = spec.model.scal0();
  ConvergenceTable table;
  std::optional<SphereParam> warm;
  double warm_r = 0.0;

  for (double r : spec.radii) {
    SweepRow row;
    row.r = r;
    RowFloors fl;
    try {
      SphereParam surface;
      if (spec.mode == SweepMode::GeodesicSpheres) {
        surface = centered_sphere(spec.model, r, spec.band_limit, spec.n_theta, spec.n_phi);
      } else {
        OptimizeOptions opts = spec.optimizer;
        opts.area_target = geodesic_sphere_area(spec.model, r, spec.band_limit, spec.n_theta, spec.n_phi);
        const SphereParam init = warm ? scaled(*warm, r / warm_r)
                                      : default_initial_surface(opts.area_target, spec.band_limit, spec.n_theta,
                                                                spec.n_phi);
        const SolveResult res = solve(spec.model, init, opts);
        surface = res.surface;
        row.converged = res.converged;
        if (res.converged) {
          warm = res.surface;
          warm_r = r;
        } else {
          row.ok = false;
          row.failure = "optimizer did not converge";
        }
      }
      const SurfaceGeometry geom = geometry(surface, spec.model);
      const FunctionalReport rep = evaluate(geom, spec.model);
      row.lambda_family = family_multiplier(spec.model, r, spec.band_limit, spec.n_theta, spec.n_phi);
      row.lambda_lsq = rep.lambda_lsq;
      row.lambda = spec.mode == SweepMode::GeodesicSpheres ? *row.lambda_family : rep.lambda_lsq;
      row.area = rep.area;
      row.W = rep.W;
      row.U = rep.U;
      row.V = rep.V;
      row.el_residual_scaled = rep.el_residual_scaled;
      row.hawking = rep.hawking;
      row.vol = rep.vol;
      row.ricci_avg = rep.ricci_avg;
      row.min_H = rep.min_H;
      row.epsilon = std::max(0.0, -row.lambda * row.area);
      const Deficits d = deficits(rep, row.lambda, scal0);
      row.D_W = d.D_W;
      row.D_lambda = d.D_lambda;
      row.D_ric = d.D_ric;
      row.D_vol = d.D_vol;
      row.hawking_ratio = d.hawking_ratio;
      row.D_hawking = d.D_hawking;
      if (!(row.min_H > 0.0)) {
        row.ok = false;
        row.failure = "min H <= 0";
      }

      const int nt2 = 2 * spec.n_theta, np2 = 2 * spec.n_phi;
      const SurfaceGeometry fine = geometry(resampled(surface, spec.band_limit, nt2, np2), spec.model);
      const FunctionalReport rep2 = evaluate(fine, spec.model);
      const double lambda2 = spec.mode == SweepMode::GeodesicSpheres
                                 ? family_multiplier(spec.model, r, spec.band_limit, nt2, np2)
                                 : rep2.lambda_lsq;
      const Deficits d2 = deficits(rep2, lambda2, scal0);
      fl.D_W = std::max(std::abs(d2.D_W - d.D_W), rounding_floor(8.0 * kPi));
      fl.D_lambda = std::max(std::abs(d2.D_lambda - d.D_lambda), rounding_floor(1.0 / rep.area + std::abs(row.lambda)));
      fl.D_ric = std::max(std::abs(d2.D_ric - d.D_ric), rounding_floor(1.0 + std::abs(scal0)));
      fl.D_vol = std::max(std::abs(d2.D_vol - d.D_vol), rounding_floor(1.0));
      fl.D_hawking = std::max(std::abs(d2.D_hawking - d.D_hawking),
                              rounding_floor(2.0 * rep.W * std::sqrt(rep.area) / (std::pow(16.0 * kPi, 1.5) * rep.vol)));
    } catch (const Error& e) {
      row.ok = false;
      row.converged = false;
      row.failure = e.what();
    }
    table.rows.push_back(row);
    table.floors.push_back(fl);
  }

  std::vector<double> r, floor;
  std::vector<bool> use;
  for (const auto& row : table.rows) {
    r.push_back(row.r);
    use.push_back(row.ok);
  }
  auto column = [&](const std::string& name, auto get_value, auto get_floor) {
    std::vector<double> v, f;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      v.push_back(get_value(table.rows[i]));
      f.push_back(get_floor(table.floors[i]));
    }
    table.slopes.push_back(fit_slope(name, r, v, f, use));
  };
  column("D_W", [](const SweepRow& x) { return x.D_W; }, [](const RowFloors& x) { return x.D_W; });
  column("D_lambda", [](const SweepRow& x) { return x.D_lambda; }, [](const RowFloors& x) { return x.D_lambda; });
  column("D_ric", [](const SweepRow& x) { return x.D_ric; }, [](const RowFloors& x) { return x.D_ric; });
  column("D_vol", [](const SweepRow& x) { return x.D_vol; }, [](const RowFloors& x) { return x.D_vol; });
  column("D_hawking", [](const SweepRow& x) { return x.D_hawking; }, [](const RowFloors& x) { return x.D_hawking; });
  column("epsilon", [](const SweepRow& x) { return x.epsilon; }, [](const RowFloors&) { return 0.0; });
  return table;
}

GradientTable gradient_experiment(const MetricModel& model, const std::vector<double>& radii, int band_limit,
                                  int n_theta, int n_phi) {
  const Vec3 s = model.grad_scal0();
  if (!(s.norm() > 0.0)) throw ValidationError("gradient experiment needs a nonzero scal_grad0");
  GradientTable table;
  table.b = s.normalized();
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(table.b[i]) < std::abs(table.b[axis])) axis = i;
  table.b_perp = table.b.cross(Vec3::Unit(axis)).normalized();

  std::vector<double> r, ratio, floor;
  std::vector<bool> use;
  for (double radius : radii) {
    GradientRow row;
    row.r = radius;
    double refined_ratio = 0.0;
    for (int level = 0; level < 2; ++level) {
      const int scale = level + 1;
      const SphereParam p = centered_sphere(model, radius, band_limit, scale * n_theta, scale * n_phi);
      const SurfaceGeometry geom = geometry(p, model);
      const VolumeResult vol = enclosed_volume(geom, model);
      const double dV = first_variations(geom, model, variation_field_from_b(geom, table.b)).dV;
      const double dV_perp = first_variations(geom, model, variation_field_from_b(geom, table.b_perp)).dV;
      const double leading = 0.5 * vol.vol * table.b.dot(s);
      const double C = std::abs(dV_perp) / (radius * std::pow(geom.area(), 1.5));
      if (level == 0) {
        row.area = geom.area();
        row.vol = vol.vol;
        row.min_H = geom.min_H();
        row.lambda = estimate_multiplier(geom).lambda_lsq;
        row.epsilon = std::max(0.0, -row.lambda * row.area);
        row.dV = dV;
        row.leading = leading;
        row.error = std::abs(dV + leading);
        row.ratio = row.error / (0.5 * vol.vol * s.norm());
        row.dV_perp = dV_perp;
        row.C_perp = C;
      } else {
        refined_ratio = std::abs(dV + leading) / (0.5 * vol.vol * s.norm());
        row.C_perp_refined = C;
      }
    }
    r.push_back(radius);
    ratio.push_back(row.ratio);
    floor.push_back(std::max(std::abs(refined_ratio - row.ratio), rounding_floor(1.0)));
    use.push_back(row.min_H > 0.0);
    table.rows.push_back(row);
  }
  table.ratio_slope = fit_slope("ratio", r, ratio, floor, use);
  return table;
}

HawkingTable hawking_experiment(const MetricModel& model, const std::vector<double>& radii, int band_limit,
                                int n_theta, int n_phi) {
  HawkingTable table;
  table.limit = model.scal0() / (16.0 * kPi);
  std::vector<double> r, err, floor;
  std::vector<bool> use;
  for (double radius : radii) {
    HawkingRow row;
    row.r = radius;
    double refined = 0.0;
    for (int level = 0; level < 2; ++level) {
      const int scale = level + 1;
      const SurfaceGeometry geom =
          geometry(centered_sphere(model, radius, band_limit, scale * n_theta, scale * n_phi), model);
      const double W = 0.5 * geom.integrate([](const NodeGeometry& n) { return n.H * n.H; });
      const double m = hawking_mass(geom.area(), W);
      const double vol = enclosed_volume(geom, model).vol;
      if (level == 0) {
        row.area = geom.area();
        row.W = W;
        row.hawking = m;
        row.vol = vol;
        row.ratio = m / vol;
        row.error = std::abs(row.ratio - table.limit);
        row.min_H = geom.min_H();
      } else {
        refined = std::abs(m / vol - table.limit);
      }
    }
    r.push_back(radius);
    err.push_back(row.error);
    floor.push_back(std::max(std::abs(refined - row.error),
                             rounding_floor(2.0 * row.W * std::sqrt(row.area) / (std::pow(16.0 * kPi, 1.5) * row.vol))));
    use.push_back(row.min_H > 0.0);
    table.rows.push_back(row);
  }
  table.error_slope = fit_slope("hawking_error", r, err, floor, use);
  return table;
}

}  // namespace willmore
