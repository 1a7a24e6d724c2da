#include "willmore/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "willmore/errors.hpp"
#include "willmore/experiments.hpp"
#include "willmore/io.hpp"
#include "willmore/parallel.hpp"
#include "willmore/verify.hpp"

namespace willmore::cli {

namespace fs = std::filesystem;
using io::json;

namespace {


struct Flags {
  std::string command;
  std::string config;
  std::optional<double> radius;
  std::optional<int> band_limit;
  std::optional<double> area;
  std::optional<std::string> out_dir;
  std::optional<std::string> format;
  std::optional<unsigned> threads;
  std::optional<std::string> export_mesh;
};

/// Config sections a command reads; anything else present is still
/// key-checked but ignored.
struct Context {
  Flags flags;
  json config;
  fs::path base_dir;
  std::string hash;
  std::optional<fs::path> out_dir;
  std::string format = "json";
  MetricModel model;
};

json section(const json& config, const std::string& key) {
  if (!config.contains(key)) return json::object();
  if (!config.at(key).is_object()) throw ValidationError(key + ": expected an object");
  return config.at(key);
}

std::vector<double> radii_of(const json& sec, const std::string& name) {
  if (!sec.contains("radii")) throw ValidationError(name + ".radii: missing");
  const json& r = sec.at("radii");
  if (!r.is_array()) throw ValidationError(name + ".radii: expected an array");
  std::vector<double> out;
  for (const auto& x : r) {
    if (!x.is_number()) throw ValidationError(name + ".radii: expected numbers");
    out.push_back(x.get<double>());
  }
  if (out.size() < 2) throw ValidationError(name + ".radii: need at least two radii");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0)) throw ValidationError(name + ".radii: must be positive");
    if (i > 0 && !(out[i] < out[i - 1])) throw ValidationError(name + ".radii: must be strictly descending");
  }
  return out;
}

int int_of(const json& sec, const std::string& name, const std::string& key, int fallback) {
  if (!sec.contains(key)) return fallback;
  if (!sec.at(key).is_number_integer()) throw ValidationError(name + "." + key + ": expected an integer");
  return sec.at(key).get<int>();
}

double double_of(const json& sec, const std::string& name, const std::string& key, double fallback) {
  if (!sec.contains(key)) return fallback;
  if (!sec.at(key).is_number()) throw ValidationError(name + "." + key + ": expected a number");
  return sec.at(key).get<double>();
}

struct GridSpec {
  int band_limit = 8;
  int n_theta = 24;
  int n_phi = 48;
};

GridSpec grid_of(const json& sec, const std::string& name) {
  GridSpec g;
  g.band_limit = int_of(sec, name, "band_limit", g.band_limit);
  g.n_theta = int_of(sec, name, "n_theta", std::max(24, 2 * g.band_limit + 2));
  g.n_phi = int_of(sec, name, "n_phi", 2 * g.n_theta);
  return g;
}

fs::path output_path(const Context& ctx, const std::string& file) {
  if (!ctx.out_dir) throw ValidationError("output_dir: required for this command (set it or pass --out)");
  return *ctx.out_dir / file;
}

void export_mesh(const Context& ctx, const SphereParam& param) {
  if (!ctx.flags.export_mesh) return;
  std::ofstream out(*ctx.flags.export_mesh);
  if (!out) throw ValidationError("--export-mesh: cannot write '" + *ctx.flags.export_mesh + "'");
  write_obj(out, param);
}

SphereParam config_surface(const Context& ctx) {
  if (!ctx.config.contains("surface")) throw ValidationError("surface: missing section");
  return io::surface_from_config(section(ctx.config, "surface"), ctx.model, ctx.base_dir);
}

void print_report(const Context& ctx, std::ostream& out, const FunctionalReport& rep) {
  if (ctx.format == "csv") {
    const json j = io::report_to_json(rep);
    io::CsvTable csv({"W", "U", "V", "area", "area_euclid", "splitting_residual", "lambda_id", "lambda_lsq",
                      "el_residual", "el_residual_scaled", "hawking", "vol", "volE", "RE", "aE_x", "aE_y", "aE_z",
                      "mean_curvature_dev", "aring_norm", "ricci_avg", "grad_log_H_sq", "min_H", "scal0"});
    csv.comment("willmore_lab " + std::string(io::kVersion) + " energy");
    csv.comment("config_hash " + ctx.hash);
    const double nan = std::nan("");
    csv.row({rep.W, rep.U, rep.V, rep.area, rep.area_euclid, rep.splitting_residual, rep.lambda_id.value_or(nan),
             rep.lambda_lsq, rep.el_residual, rep.el_residual_scaled, rep.hawking, rep.vol, rep.volE, rep.fit.RE,
             rep.fit.aE[0], rep.fit.aE[1], rep.fit.aE[2], rep.fit.mean_curvature_dev, rep.fit.aring_norm,
             rep.ricci_avg, rep.grad_log_H_sq.value_or(nan), rep.min_H, rep.scal0});
    csv.write(out);
  } else {
    out << io::report_to_json(rep).dump(2) << '\n';
  }
}

int cmd_geom(const Context& ctx, std::ostream& out) {
  const SphereParam param = config_surface(ctx);
  const SurfaceGeometry geom = geometry(param, ctx.model);
  double max_H = -std::numeric_limits<double>::infinity();
  for (const auto& n : geom.nodes()) max_H = std::max(max_H, n.H);
  json summary = {{"nodes", geom.size()},     {"area", geom.area()}, {"area_euclid", geom.area_euclid()},
                  {"min_H", geom.min_H()},    {"max_H", max_H}};
  if (ctx.out_dir) {
    const std::vector<double> lap = laplace_beltrami(geom, [&] {
      std::vector<double> h;
      for (const auto& n : geom.nodes()) h.push_back(n.H);
      return h;
    }());
    json nodes = json::array();
    auto v3 = [](const Vec3& v) { return json::array({v[0], v[1], v[2]}); };
    auto m2 = [](const Mat2& m) { return json::array({m(0, 0), m(0, 1), m(1, 0), m(1, 1)}); };
    for (std::size_t i = 0; i < geom.size(); ++i) {
      const auto& n = geom.node(i);
      nodes.push_back({{"F", v3(n.F)},
                       {"F_theta", v3(n.dF[0])},
                       {"F_phi", v3(n.dF[1])},
                       {"gamma", m2(n.gamma)},
                       {"gammaE", m2(n.gammaE)},
                       {"nu", v3(n.nu)},
                       {"nuE", v3(n.nuE)},
                       {"A", m2(n.A)},
                       {"H", n.H},
                       {"Aring", m2(n.Aring)},
                       {"HE", n.HE},
                       {"AringE", m2(n.AringE)},
                       {"lapH", lap[i]},
                       {"omega", {n.omega[0], n.omega[1]}},
                       {"sigma_scal", n.sigma_scal},
                       {"dmu", n.dmu},
                       {"dmuE", n.dmuE}});
    }
    json doc = summary;
    doc["config_hash"] = ctx.hash;
    doc["node_data"] = nodes;
    io::save_json(output_path(ctx, "geometry.json"), doc);
  }
  export_mesh(ctx, param);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_energy(const Context& ctx, std::ostream& out) {
  const SphereParam param = config_surface(ctx);
  const FunctionalReport rep = evaluate(geometry(param, ctx.model), ctx.model);
  export_mesh(ctx, param);
  print_report(ctx, out, rep);
  if (ctx.out_dir) {
    json doc = {{"config_hash", ctx.hash}, {"report", io::report_to_json(rep)}};
    io::save_json(output_path(ctx, "report.json"), doc);
  }
  return kExitOk;
}

int cmd_minimize(const Context& ctx, std::ostream& out, std::ostream& err) {
  const SphereParam init = config_surface(ctx);
  OptimizeOptions opts = io::optimizer_from_json(section(ctx.config, "optimizer"));
  if (!(opts.area_target > 0.0)) opts.area_target = geometry(init, ctx.model).area();
  const SolveResult res = solve(ctx.model, init, opts);
  io::write_surface(output_path(ctx, "surface.json"), res.surface);
  json doc = {{"config_hash", ctx.hash},
              {"converged", res.converged},
              {"residual_scaled", res.residual_scaled},
              {"lambda", res.lambda},
              {"lambda_id", res.lambda_id ? json(*res.lambda_id) : json(nullptr)},
              {"outer_rounds", res.outer_rounds},
              {"inner_steps", res.inner_steps},
              {"reparameterizations", res.reparameterizations},
              {"gradient_check", res.gradient_check},
              {"optimizer", io::optimizer_to_json(opts)},
              {"report", io::report_to_json(res.report)}};
  io::save_json(output_path(ctx, "report.json"), doc);
  io::history_csv(res, ctx.hash).save(output_path(ctx, "history.csv"));
  export_mesh(ctx, res.surface);
  print_report(ctx, out, res.report);
  if (!res.converged) {
    err << "error: optimizer did not converge (residual_scaled " << res.residual_scaled << ")\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_sweep(const Context& ctx, std::ostream& out, std::ostream& err) {
  const json sec = section(ctx.config, "sweep");
  io::check_keys(sec, "sweep", {"radii", "mode", "band_limit", "n_theta", "n_phi"});
  SweepSpec spec;
  spec.model = ctx.model;
  spec.radii = radii_of(sec, "sweep");
  if (sec.contains("mode")) {
    if (!sec.at("mode").is_string()) throw ValidationError("sweep.mode: expected a string");
    spec.mode = sweep_mode_from_string(sec.at("mode").get<std::string>());
  }
  const GridSpec g = grid_of(sec, "sweep");
  spec.band_limit = g.band_limit;
  spec.n_theta = g.n_theta;
  spec.n_phi = g.n_phi;
  spec.optimizer = io::optimizer_from_json(section(ctx.config, "optimizer"));
  const ConvergenceTable table = sweep(spec);
  io::sweep_csv(table, ctx.hash).save(output_path(ctx, "sweep.csv"));
  json summary = io::sweep_summary(table);
  summary["config_hash"] = ctx.hash;
  summary["mode"] = to_string(spec.mode);
  io::save_json(output_path(ctx, "sweep_summary.json"), summary);
  out << summary.dump(2) << '\n';
  for (const auto& r : table.rows)
    if (!r.ok) {
      err << "error: sweep row r=" << r.r << " failed: " << r.failure << '\n';
      return kExitNumerical;
    }
  return kExitOk;
}

int cmd_gradient(const Context& ctx, std::ostream& out) {
  const json sec = section(ctx.config, "gradient");
  io::check_keys(sec, "gradient", {"radii", "band_limit", "n_theta", "n_phi"});
  const GridSpec g = grid_of(sec, "gradient");
  const GradientTable table = gradient_experiment(ctx.model, radii_of(sec, "gradient"), g.band_limit, g.n_theta, g.n_phi);
  io::gradient_csv(table, ctx.hash).save(output_path(ctx, "gradient.csv"));
  json summary = io::gradient_summary(table);
  summary["config_hash"] = ctx.hash;
  io::save_json(output_path(ctx, "gradient_summary.json"), summary);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_hawking(const Context& ctx, std::ostream& out) {
  const json sec = section(ctx.config, "hawking");
  io::check_keys(sec, "hawking", {"radii", "band_limit", "n_theta", "n_phi"});
  const GridSpec g = grid_of(sec, "hawking");
  const HawkingTable table = hawking_experiment(ctx.model, radii_of(sec, "hawking"), g.band_limit, g.n_theta, g.n_phi);
  io::hawking_csv(table, ctx.hash).save(output_path(ctx, "hawking.csv"));
  json summary = io::hawking_summary(table);
  summary["config_hash"] = ctx.hash;
  io::save_json(output_path(ctx, "hawking_summary.json"), summary);
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const Context& ctx, std::ostream& out, std::ostream& err) {
  const json sec = section(ctx.config, "verify");
  io::check_keys(sec, "verify",
                 {"surfaces", "seed", "radius", "amplitude", "max_degree", "band_limit", "n_theta", "n_phi"});
  VerifyOptions opts;
  opts.surfaces = int_of(sec, "verify", "surfaces", opts.surfaces);
  opts.seed = static_cast<unsigned>(int_of(sec, "verify", "seed", static_cast<int>(opts.seed)));
  opts.radius = ctx.flags.radius.value_or(double_of(sec, "verify", "radius", opts.radius));
  opts.amplitude = double_of(sec, "verify", "amplitude", opts.amplitude);
  opts.max_degree = int_of(sec, "verify", "max_degree", opts.max_degree);
  const GridSpec g = grid_of(sec, "verify");
  opts.band_limit = ctx.flags.band_limit.value_or(g.band_limit);
  opts.n_theta = int_of(sec, "verify", "n_theta", std::max(24, 2 * opts.band_limit + 2));
  opts.n_phi = int_of(sec, "verify", "n_phi", 2 * opts.n_theta);
  const auto checks = run_verification(ctx.model, opts);
  int failed = 0;
  io::CsvTable csv({"suite", "value", "tolerance", "pass", "name"});
  csv.comment("willmore_lab " + std::string(io::kVersion) + " verify");
  csv.comment("config_hash " + ctx.hash);
  for (const auto& c : checks) {
    failed += c.pass ? 0 : 1;
    out << (c.pass ? "PASS " : "FAIL ") << c.suite << ' ' << c.name << " value=" << io::format_double(c.value)
        << " tol=" << io::format_double(c.tolerance) << '\n';
  }
  if (ctx.out_dir) {
    std::ofstream file(output_path(ctx, "verify.csv"));
    file << "# willmore_lab " << io::kVersion << " verify\n# config_hash " << ctx.hash << "\n";
    file << "suite,name,value,tolerance,pass\n";
    for (const auto& c : checks)
      file << c.suite << ',' << c.name << ',' << io::format_double(c.value) << ','
           << io::format_double(c.tolerance) << ',' << (c.pass ? 1 : 0) << '\n';
  }
  out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  if (failed > 0) {
    err << "error: " << failed << " identity checks failed\n";
    return kExitNumerical;
  }
  return kExitOk;
}

/// Folds flag overrides into the config so the hash covers the effective run.
void apply_overrides(json& config, const Flags& f) {
  auto ensure = [&](const char* key) -> json& {
    if (!config.contains(key)) config[key] = json::object();
    return config[key];
  };
  if (f.radius && (f.command == "geom" || f.command == "energy" || f.command == "minimize"))
    ensure("surface")["radius"] = *f.radius;
  if (f.band_limit) {
    if (f.command == "sweep" || f.command == "gradient" || f.command == "hawking") {
      ensure(f.command.c_str())["band_limit"] = *f.band_limit;
    } else if (f.command == "verify") {
      ensure("verify")["band_limit"] = *f.band_limit;
    } else {
      ensure("surface")["band_limit"] = *f.band_limit;
    }
  }
  if (f.radius && f.command == "verify") ensure("verify")["radius"] = *f.radius;
  if (f.area) ensure("optimizer")["area_target"] = *f.area;
  if (f.out_dir) config["output_dir"] = *f.out_dir;
  if (f.format) config["format"] = *f.format;
}

int dispatch(Flags flags, std::ostream& out, std::ostream& err) {
  Context ctx;
  const fs::path cfg_path = flags.config;
  ctx.config = io::load_json(cfg_path);
  if (!ctx.config.is_object()) throw ValidationError("config: expected an object at top level");
  ctx.base_dir = cfg_path.parent_path();
  io::check_keys(ctx.config, "",
                 {"command", "metric", "surface", "optimizer", "sweep", "gradient", "hawking", "verify",
                  "output_dir", "format", "threads"});
  if (ctx.config.contains("command")) {
    if (!ctx.config.at("command").is_string() || ctx.config.at("command").get<std::string>() != flags.command)
      throw ValidationError("command: config is for a different command");
  }
  apply_overrides(ctx.config, flags);
  ctx.hash = io::config_hash(ctx.config);

  if (ctx.config.contains("format")) {
    if (!ctx.config.at("format").is_string()) throw ValidationError("format: expected a string");
    ctx.format = ctx.config.at("format").get<std::string>();
    if (ctx.format != "json" && ctx.format != "csv") throw ValidationError("format: expected json or csv");
  }
  if (ctx.config.contains("output_dir")) {
    if (!ctx.config.at("output_dir").is_string()) throw ValidationError("output_dir: expected a string");
    fs::path dir = ctx.config.at("output_dir").get<std::string>();
    if (!flags.out_dir && dir.is_relative()) dir = ctx.base_dir / dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw ValidationError("output_dir: cannot create '" + dir.string() + "'");
    ctx.out_dir = dir;
  }
  unsigned threads = flags.threads.value_or(0);
  if (!flags.threads && ctx.config.contains("threads")) {
    if (!ctx.config.at("threads").is_number_unsigned()) throw ValidationError("threads: expected a non-negative integer");
    threads = ctx.config.at("threads").get<unsigned>();
  }
  set_thread_count(threads);

  if (!ctx.config.contains("metric")) throw ValidationError("metric: missing section");
  ctx.model = io::metric_from_json(section(ctx.config, "metric"));
  ctx.flags = std::move(flags);

  const std::string& c = ctx.flags.command;
  if (c == "geom") return cmd_geom(ctx, out);
  if (c == "energy") return cmd_energy(ctx, out);
  if (c == "minimize") return cmd_minimize(ctx, out, err);
  if (c == "sweep") return cmd_sweep(ctx, out, err);
  if (c == "gradient") return cmd_gradient(ctx, out);
  if (c == "hawking") return cmd_hawking(ctx, out);
  if (c == "verify") return cmd_verify(ctx, out, err);
  throw ValidationError("command: unknown '" + c + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical lab for area-constrained Willmore surfaces", "willmore_lab"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1, 1);
  Flags flags;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"geom", "Evaluate per-node surface geometry"},
      {"energy", "Print the functional report of a surface"},
      {"minimize", "Minimize W at fixed area"},
      {"sweep", "Radius sweep with convergence-order fits"},
      {"gradient", "Volume derivative against the scalar curvature gradient"},
      {"hawking", "Hawking mass to volume ratio"},
      {"verify", "Run the identity and first-variation suites"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "Config document (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--radius", flags.radius, "Override the surface radius");
    sub->add_option("--band-limit", flags.band_limit, "Override the band limit");
    sub->add_option("--area", flags.area, "Override the optimizer area target");
    sub->add_option("--out", flags.out_dir, "Output directory");
    sub->add_option("--format", flags.format, "Report format on stdout")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
    sub->add_option("--export-mesh", flags.export_mesh, "Write the surface as an OBJ mesh");
    sub->callback([&flags, sub] { flags.command = sub->get_name(); });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << io::kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInvalid;
  }

  try {
    return dispatch(flags, out, err);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const DomainError& e) {
    err << "error: domain: " << e.what() << '\n';
  } catch (const ShapeError& e) {
    err << "error: shape: " << e.what() << '\n';
  } catch (const HypothesisViolation& e) {
    err << "error: hypothesis: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ImmersionError& e) {
    err << "error: immersion: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInvalid;
}

}  // namespace willmore::cli
