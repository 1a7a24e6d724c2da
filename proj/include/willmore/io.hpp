#pragma once

// JSON config, surface and report documents, and CSV tables whose '#'
// header carries the tool version and a hash of the effective config.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "willmore/experiments.hpp"
#include "willmore/functionals.hpp"
#include "willmore/optimize.hpp"
#include "willmore/surface.hpp"

namespace willmore::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

/// Throws ValidationError naming `section.key` for any key not in `allowed`.
void check_keys(const json& obj, const std::string& section, const std::vector<std::string>& allowed);

json load_json(const std::filesystem::path& path);
void save_json(const std::filesystem::path& path, const json& doc);

MetricModel metric_from_json(const json& doc);
json metric_to_json(const MetricModel& model);

json surface_to_json(const SphereParam& param);
SphereParam surface_from_json(const json& doc);
void write_surface(const std::filesystem::path& path, const SphereParam& param);
SphereParam read_surface(const std::filesystem::path& path);

/// Builds the surface described by a config "surface" section. File paths
/// are resolved against base_dir.
SphereParam surface_from_config(const json& section, const MetricModel& model,
                                const std::filesystem::path& base_dir);

OptimizeOptions optimizer_from_json(const json& section, OptimizeOptions defaults = {});
json optimizer_to_json(const OptimizeOptions& opts);

json report_to_json(const FunctionalReport& rep);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data);
/// 16 hex digits of the FNV-1a hash of the compact config dump.
std::string config_hash(const json& config);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}
  void comment(const std::string& line) { comments_.push_back(line); }
  void row(const std::vector<double>& values);
  /// Row with a trailing free-text column, quoted as needed.
  void row(const std::vector<double>& values, const std::string& text);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

/// CSV of a sweep with columns in a fixed documented order.
CsvTable sweep_csv(const ConvergenceTable& table, const std::string& hash);
json sweep_summary(const ConvergenceTable& table);

CsvTable gradient_csv(const GradientTable& table, const std::string& hash);
json gradient_summary(const GradientTable& table);

CsvTable hawking_csv(const HawkingTable& table, const std::string& hash);
json hawking_summary(const HawkingTable& table);

CsvTable history_csv(const SolveResult& result, const std::string& hash);

json slope_to_json(const SlopeFit& fit);

}  // namespace willmore::io
