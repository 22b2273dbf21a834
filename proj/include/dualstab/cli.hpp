#pragma once

// Command-line driver: run configuration, report tables and the verification
// and experiment commands behind `dualstab`.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dualstab/models.hpp"

namespace dualstab::cli {

enum class Format { csv, json };

inline const std::vector<std::string> kCommands = {"constants", "spectral",  "infsup",
                                                   "solve",     "converge", "condense-check"};

/// Validated configuration of one CLI run.
struct RunConfig {
  std::string command;
  models::ModelConfig model;
  /// Coarse mesh sizes to sweep; empty means the command default.
  std::vector<int> levels;
  std::uint64_t seed = 20240611;
  Format format = Format::csv;
  std::optional<std::string> out;
  /// converge: also re-run each level on a truth mesh refined once more.
  bool truth_check = false;

  /// key = value pairs echoed into reports, in a fixed order.
  std::vector<std::pair<std::string, std::string>> echo() const;
  /// Model configuration at one coarse level.
  models::ModelConfig at_level(int coarse_elems) const;
  std::vector<int> resolved_levels() const;
};

/// Parses the flat `key = value` format; '#' starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

/// Applies settings over the defaults, later maps overriding earlier ones.
/// Throws ConfigError naming the offending field.
RunConfig make_run_config(const std::string& command,
                          const std::vector<std::map<std::string, std::string>>& layers);

using Cell = std::variant<std::monostate, double, long long, std::string, bool>;

struct Report {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  bool verdict = true;

  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;
  std::string render(Format format) const;
};

/// Reals are written with 17 significant digits.
std::string format_real(double v);

Report cmd_constants(const RunConfig& cfg);
Report cmd_spectral(const RunConfig& cfg);
Report cmd_infsup(const RunConfig& cfg);
Report cmd_solve(const RunConfig& cfg);
Report cmd_converge(const RunConfig& cfg);
Report cmd_condense_check(const RunConfig& cfg);
Report run_command(const RunConfig& cfg);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& content);

/// Full CLI entry point. Exit codes: 0 all checks pass, 1 a check failed,
/// 2 configuration error, 3 numerical failure.
int run_main(int argc, const char* const* argv);

}  // namespace dualstab::cli
