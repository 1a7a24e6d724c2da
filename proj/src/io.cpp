#include "willmore/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "willmore/errors.hpp"

namespace willmore::io {

namespace {


const char* kConvention =
    "real orthonormal spherical harmonics without Condon-Shortley phase; index l*l+l+m; "
    "m>0 cos(m phi), m<0 sin(|m| phi)";

std::string where(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

double number(const json& obj, const std::string& section, const std::string& key) {
  if (!obj.contains(key)) throw ValidationError(where(section, key) + ": missing");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(where(section, key) + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(where(section, key) + ": not finite");
  return d;
}

double number_or(const json& obj, const std::string& section, const std::string& key, double fallback) {
  return obj.contains(key) ? number(obj, section, key) : fallback;
}

int integer_or(const json& obj, const std::string& section, const std::string& key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError(where(section, key) + ": expected an integer");
  return v.get<int>();
}

std::vector<double> numbers(const json& obj, const std::string& section, const std::string& key,
                            std::size_t expected) {
  if (!obj.contains(key)) throw ValidationError(where(section, key) + ": missing");
  const json& v = obj.at(key);
  if (!v.is_array()) throw ValidationError(where(section, key) + ": expected an array");
  if (expected != 0 && v.size() != expected)
    throw ValidationError(where(section, key) + ": expected " + std::to_string(expected) + " values");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ValidationError(where(section, key) + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

Vec3 vec3(const json& obj, const std::string& section, const std::string& key) {
  const auto v = numbers(obj, section, key, 3);
  return {v[0], v[1], v[2]};
}

std::string text(const json& obj, const std::string& section, const std::string& key) {
  if (!obj.contains(key)) throw ValidationError(where(section, key) + ": missing");
  if (!obj.at(key).is_string()) throw ValidationError(where(section, key) + ": expected a string");
  return obj.at(key).get<std::string>();
}

const json& object(const json& doc, const std::string& key) {
  if (!doc.contains(key)) throw ValidationError(key + ": missing section");
  if (!doc.at(key).is_object()) throw ValidationError(key + ": expected an object");
  return doc.at(key);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> header(const std::string& what, const std::string& hash) {
  return {"willmore_lab " + std::string(kVersion) + " " + what, "config_hash " + hash};
}

}  // namespace

void check_keys(const json& obj, const std::string& section, const std::vector<std::string>& allowed) {
  if (!obj.is_object()) throw ValidationError((section.empty() ? "config" : section) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || a == key;
    if (!ok) throw ValidationError(where(section, key) + ": unknown key");
  }
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed document '" + path.string() + "': " + e.what());
  }
}

void save_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

MetricModel metric_from_json(const json& doc) {
  const std::string s = "metric";
  // h0 and scal0 are derived quantities written by metric_to_json; ignored on input.
  check_keys(doc, s, {"kind", "k", "rho", "ric0", "scal_grad0", "h0", "scal0"});
  const MetricKind kind = metric_kind_from_string(text(doc, s, "kind"));
  const double rho = number_or(doc, s, "rho", 1.0);
  switch (kind) {
    case MetricKind::Flat:
      return make_flat(rho);
    case MetricKind::SpaceForm:
      return make_space_form(number(doc, s, "k"), rho);
    case MetricKind::QuadraticCurvature: {
      const auto r = numbers(doc, s, "ric0", 9);
      Mat3 ric;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ric(i, j) = r[3 * i + j];
      const Vec3 grad = doc.contains("scal_grad0") ? vec3(doc, s, "scal_grad0") : Vec3::Zero();
      return make_quadratic_curvature(ric, grad, rho);
    }
  }
  throw ValidationError("metric.kind: unsupported");
}

json metric_to_json(const MetricModel& model) {
  json j;
  j["kind"] = to_string(model.kind);
  if (model.kind == MetricKind::SpaceForm) j["k"] = model.k;
  j["rho"] = model.rho;
  if (model.kind == MetricKind::QuadraticCurvature) {
    json r = json::array();
    for (int i = 0; i < 3; ++i)
      for (int jj = 0; jj < 3; ++jj) r.push_back(model.ric0(i, jj));
    j["ric0"] = r;
    j["scal_grad0"] = {model.scal_grad0[0], model.scal_grad0[1], model.scal_grad0[2]};
  }
  j["h0"] = model.h0;
  j["scal0"] = model.scal0();
  return j;
}

json surface_to_json(const SphereParam& param) {
  json j;
  j["format"] = "willmore_surface";
  j["version"] = 1;
  j["convention"] = kConvention;
  j["band_limit"] = param.band_limit;
  j["n_theta"] = param.n_theta;
  j["n_phi"] = param.n_phi;
  j["coeffs"] = {{"x", param.coeffs[0]}, {"y", param.coeffs[1]}, {"z", param.coeffs[2]}};
  return j;
}

SphereParam surface_from_json(const json& doc) {
  const std::string s = "surface_file";
  check_keys(doc, s, {"format", "version", "convention", "band_limit", "n_theta", "n_phi", "coeffs"});
  if (text(doc, s, "format") != "willmore_surface") throw ValidationError("surface_file.format: unexpected value");
  SphereParam p;
  p.band_limit = integer_or(doc, s, "band_limit", -1);
  p.n_theta = integer_or(doc, s, "n_theta", -1);
  p.n_phi = integer_or(doc, s, "n_phi", -1);
  const json& c = object(doc, "coeffs");
  check_keys(c, "surface_file.coeffs", {"x", "y", "z"});
  const char* names[3] = {"x", "y", "z"};
  for (int i = 0; i < 3; ++i) p.coeffs[i] = numbers(c, "surface_file.coeffs", names[i], 0);
  p.validate();
  return p;
}

void write_surface(const std::filesystem::path& path, const SphereParam& param) {
  save_json(path, surface_to_json(param));
}

SphereParam read_surface(const std::filesystem::path& path) { return surface_from_json(load_json(path)); }

SphereParam surface_from_config(const json& section, const MetricModel& model,
                                const std::filesystem::path& base_dir) {
  const std::string s = "surface";
  check_keys(section, s,
             {"type", "center", "radius", "semiaxes", "amplitude", "max_degree", "seed", "path", "band_limit",
              "n_theta", "n_phi"});
  const std::string type = section.contains("type") ? text(section, s, "type") : "round";
  const int L = integer_or(section, s, "band_limit", 8);
  const int nt = integer_or(section, s, "n_theta", std::max(24, 2 * L + 2));
  const int np = integer_or(section, s, "n_phi", 2 * nt);
  const Vec3 center = section.contains("center") ? vec3(section, s, "center") : Vec3::Zero();
  if (type == "round") return build_round_sphere(center, number(section, s, "radius"), L, nt, np, model.rho);
  if (type == "ellipsoid") return build_ellipsoid(center, vec3(section, s, "semiaxes"), L, nt, np);
  if (type == "perturbed")
    return build_perturbed_sphere(center, number(section, s, "radius"), number_or(section, s, "amplitude", 0.05),
                                  integer_or(section, s, "max_degree", 4),
                                  static_cast<unsigned>(integer_or(section, s, "seed", 1)), L, nt, np);
  if (type == "file") {
    std::filesystem::path p = text(section, s, "path");
    if (p.is_relative()) p = base_dir / p;
    SphereParam param = read_surface(p);
    if (section.contains("band_limit") || section.contains("n_theta") || section.contains("n_phi"))
      param = resampled(param, L, nt, np);
    return param;
  }
  throw ValidationError("surface.type: expected round, ellipsoid, perturbed or file, got '" + type + "'");
}

OptimizeOptions optimizer_from_json(const json& section, OptimizeOptions d) {
  const std::string s = "optimizer";
  check_keys(section, s,
             {"area_target", "max_outer", "max_inner", "el_tol", "area_tol", "penalty0", "step0", "freeze_center",
              "seed"});
  d.area_target = number_or(section, s, "area_target", d.area_target);
  d.max_outer = integer_or(section, s, "max_outer", d.max_outer);
  d.max_inner = integer_or(section, s, "max_inner", d.max_inner);
  d.el_tol = number_or(section, s, "el_tol", d.el_tol);
  d.area_tol = number_or(section, s, "area_tol", d.area_tol);
  d.penalty0 = number_or(section, s, "penalty0", d.penalty0);
  d.step0 = number_or(section, s, "step0", d.step0);
  if (section.contains("freeze_center")) {
    if (!section.at("freeze_center").is_boolean()) throw ValidationError("optimizer.freeze_center: expected a boolean");
    d.freeze_center = section.at("freeze_center").get<bool>();
  }
  d.seed = static_cast<unsigned>(integer_or(section, s, "seed", static_cast<int>(d.seed)));
  return d;
}

json optimizer_to_json(const OptimizeOptions& o) {
  return {{"area_target", o.area_target}, {"max_outer", o.max_outer}, {"max_inner", o.max_inner},
          {"el_tol", o.el_tol},           {"area_tol", o.area_tol},   {"penalty0", o.penalty0},
          {"step0", o.step0},             {"freeze_center", o.freeze_center}, {"seed", o.seed}};
}

json report_to_json(const FunctionalReport& r) {
  json j;
  j["W"] = r.W;
  j["U"] = r.U;
  j["V"] = r.V;
  j["area"] = r.area;
  j["area_euclid"] = r.area_euclid;
  j["genus"] = r.genus;
  j["splitting_residual"] = r.splitting_residual;
  j["lambda_id"] = optional_number(r.lambda_id);
  j["lambda_lsq"] = r.lambda_lsq;
  j["el_residual"] = r.el_residual;
  j["el_residual_scaled"] = r.el_residual_scaled;
  j["hawking"] = r.hawking;
  j["vol"] = r.vol;
  j["volE"] = r.volE;
  j["RE"] = r.fit.RE;
  j["aE"] = {r.fit.aE[0], r.fit.aE[1], r.fit.aE[2]};
  j["mean_curvature_dev"] = r.fit.mean_curvature_dev;
  j["aring_norm"] = r.fit.aring_norm;
  j["ricci_avg"] = r.ricci_avg;
  j["grad_log_H_sq"] = optional_number(r.grad_log_H_sq);
  j["min_H"] = r.min_H;
  j["scal0"] = r.scal0;
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const json& config) {
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << fnv1a64(config.dump());
  return os.str();
}

void CsvTable::row(const std::vector<double>& values) {
  if (values.size() != columns_.size()) throw ShapeError("csv row width does not match the header");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) line += (i ? "," : "") + format_double(values[i]);
  rows_.push_back(line);
}

void CsvTable::row(const std::vector<double>& values, const std::string& text) {
  if (values.size() + 1 != columns_.size()) throw ShapeError("csv row width does not match the header");
  std::string line;
  for (double v : values) line += format_double(v) + ",";
  rows_.push_back(line + csv_field(text));
}

void CsvTable::write(std::ostream& out) const {
  for (const auto& c : comments_) out << "# " << c << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << '\n';
  for (const auto& r : rows_) out << r << '\n';
}

void CsvTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  write(out);
}

json slope_to_json(const SlopeFit& fit) {
  return {{"column", fit.column},       {"slope", optional_number(fit.slope)}, {"intercept", fit.intercept},
          {"residual", fit.residual},   {"rows_used", fit.rows_used},          {"floor_limited", fit.floor_limited},
          {"max_deficit", fit.max_deficit}};
}

CsvTable sweep_csv(const ConvergenceTable& table, const std::string& hash) {
  CsvTable csv({"r", "ok", "converged", "area", "W", "U", "V", "lambda", "lambda_lsq", "lambda_family",
                "el_residual_scaled", "hawking", "vol", "ricci_avg", "min_H", "epsilon", "D_W", "D_lambda", "D_ric",
                "D_vol", "hawking_ratio", "D_hawking", "floor_D_W", "floor_D_lambda", "floor_D_ric", "floor_D_vol",
                "floor_D_hawking", "failure"});
  for (const auto& c : header("sweep", hash)) csv.comment(c);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    const auto& f = table.floors[i];
    csv.row({r.r, r.ok ? 1.0 : 0.0, r.converged ? 1.0 : 0.0, r.area, r.W, r.U, r.V, r.lambda, r.lambda_lsq,
             r.lambda_family.value_or(std::nan("")), r.el_residual_scaled, r.hawking, r.vol, r.ricci_avg, r.min_H,
             r.epsilon, r.D_W, r.D_lambda, r.D_ric, r.D_vol, r.hawking_ratio, r.D_hawking, f.D_W, f.D_lambda, f.D_ric,
             f.D_vol, f.D_hawking},
            r.failure);
  }
  return csv;
}

json sweep_summary(const ConvergenceTable& table) {
  json j;
  json slopes = json::array();
  for (const auto& s : table.slopes) slopes.push_back(slope_to_json(s));
  j["slopes"] = slopes;
  int failed = 0;
  for (const auto& r : table.rows) failed += r.ok ? 0 : 1;
  j["rows"] = table.rows.size();
  j["failed_rows"] = failed;
  return j;
}

CsvTable gradient_csv(const GradientTable& table, const std::string& hash) {
  CsvTable csv({"r", "area", "vol", "min_H", "lambda", "epsilon", "dV", "leading", "error", "ratio", "dV_perp",
                "C_perp", "C_perp_refined"});
  for (const auto& c : header("gradient", hash)) csv.comment(c);
  for (const auto& r : table.rows)
    csv.row({r.r, r.area, r.vol, r.min_H, r.lambda, r.epsilon, r.dV, r.leading, r.error, r.ratio, r.dV_perp,
             r.C_perp, r.C_perp_refined});
  return csv;
}

json gradient_summary(const GradientTable& table) {
  return {{"b", {table.b[0], table.b[1], table.b[2]}},
          {"b_perp", {table.b_perp[0], table.b_perp[1], table.b_perp[2]}},
          {"ratio_slope", slope_to_json(table.ratio_slope)}};
}

CsvTable hawking_csv(const HawkingTable& table, const std::string& hash) {
  CsvTable csv({"r", "area", "W", "hawking", "vol", "ratio", "error", "min_H"});
  for (const auto& c : header("hawking", hash)) csv.comment(c);
  for (const auto& r : table.rows) csv.row({r.r, r.area, r.W, r.hawking, r.vol, r.ratio, r.error, r.min_H});
  return csv;
}

json hawking_summary(const HawkingTable& table) {
  return {{"limit", table.limit}, {"limit_formula", "Scal(0) / (16 pi)"}, {"error_slope", slope_to_json(table.error_slope)}};
}

CsvTable history_csv(const SolveResult& result, const std::string& hash) {
  CsvTable csv({"iter", "W", "area", "el_residual", "lambda_estimate"});
  for (const auto& c : header("minimize", hash)) csv.comment(c);
  for (const auto& h : result.history)
    csv.row({static_cast<double>(h.iter), h.W, h.area, h.el_residual, h.lambda_estimate});
  return csv;
}

}  // namespace willmore::io
