#include <algorithm>
#include <fstream>
#include <sstream>

#include "dualstab/cli.hpp"

namespace dualstab::cli {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long long parse_int(const std::string& field, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size()) {
    throw ConfigError(field, "expected an integer, got '" + value + "'");
  }
  return v;
}

int parse_elems(const std::string& field, const std::string& value) {
  const long long v = parse_int(field, value);
  if (v < 2 || v > (1 << 20)) throw ConfigError(field, "out of range: " + value);
  return static_cast<int>(v);
}

double parse_real(const std::string& field, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (value.empty() || used != value.size() || !std::isfinite(v)) {
    throw ConfigError(field, "expected a real number, got '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(field, "expected true or false, got '" + value + "'");
}

std::vector<int> parse_levels(const std::string& value) {
  std::vector<int> levels;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) levels.push_back(parse_elems("levels", trim(item)));
  if (levels.empty()) throw ConfigError("levels", "empty level list");
  return levels;
}

bool is_power_of_two(long n) { return n >= 1 && (n & (n - 1)) == 0; }

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

RunConfig make_run_config(const std::string& command,
                          const std::vector<std::map<std::string, std::string>>& layers) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    throw ConfigError("command", "unknown command '" + command + "'");
  }
  RunConfig cfg;
  cfg.command = command;
  for (const auto& layer : layers) {
    for (const auto& [key, value] : layer) {
      if (key == "truth_elems") {
        cfg.model.truth_elems = parse_elems(key, value);
      } else if (key == "coarse_elems") {
        cfg.model.coarse_elems = parse_elems(key, value);
      } else if (key == "pressure") {
        cfg.model.pressure = models::parse_pressure(value);
      } else if (key == "w") {
        cfg.model.w = models::WChoice::parse(value);
      } else if (key == "s") {
        cfg.model.s = dualprod::StiffnessChoice::parse(value);
      } else if (key == "gamma") {
        cfg.model.gamma = models::GammaChoice::parse(value);
      } else if (key == "reaction") {
        cfg.model.reaction = parse_real(key, value);
      } else if (key == "seed") {
        const long long s = parse_int(key, value);
        if (s < 0) throw ConfigError(key, "must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "levels") {
        cfg.levels = parse_levels(value);
      } else if (key == "format") {
        if (value == "csv") {
          cfg.format = Format::csv;
        } else if (value == "json") {
          cfg.format = Format::json;
        } else {
          throw ConfigError(key, "expected csv or json, got '" + value + "'");
        }
      } else if (key == "out") {
        if (value.empty()) throw ConfigError(key, "empty path");
        cfg.out = value;
      } else if (key == "truth_check") {
        cfg.truth_check = parse_bool(key, value);
      } else {
        throw ConfigError(key, "unknown configuration key");
      }
    }
  }
  cfg.model.validate();
  for (int level : cfg.resolved_levels()) cfg.at_level(level).validate();
  return cfg;
}

models::ModelConfig RunConfig::at_level(int coarse_elems) const {
  models::ModelConfig m = model;
  m.coarse_elems = coarse_elems;
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("levels", "level " + std::to_string(coarse_elems) + ": " + e.what());
  }
  return m;
}

std::vector<int> RunConfig::resolved_levels() const {
  if (!levels.empty()) return levels;
  if (command != "converge") return {model.coarse_elems};
  // Dyadic sweep from the configured coarse mesh while the spaces still nest.
  const long factor = model.w.kind == models::WChoice::Kind::refined ? model.w.factor : 1;
  std::vector<int> out;
  for (long n = model.coarse_elems; out.size() < 5 && n * factor <= model.truth_elems &&
                                    n < model.truth_elems && is_power_of_two(n);
       n *= 2) {
    out.push_back(static_cast<int>(n));
  }
  if (out.size() < 2) out = {model.coarse_elems};
  return out;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::string lv;
  for (int l : resolved_levels()) lv += (lv.empty() ? "" : ",") + std::to_string(l);
  return {
      {"truth_elems", std::to_string(model.truth_elems)},
      {"coarse_elems", std::to_string(model.coarse_elems)},
      {"pressure", models::to_string(model.pressure)},
      {"w", model.w.to_string()},
      {"s", model.s.to_string()},
      {"gamma", model.gamma.to_string()},
      {"reaction", format_real(model.reaction)},
      {"levels", lv},
      {"truth_check", truth_check ? "true" : "false"},
  };
}

}  // namespace dualstab::cli
