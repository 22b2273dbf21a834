#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dualstab/cli.hpp"
#include "dualstab/errors.hpp"

namespace dualstab::cli {

namespace {

std::string cell_text(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(double v) const { return format_real(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(const std::string& v) const { return v; }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::ordered_json cell_json(const Cell& c) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(double v) const {
      if (!std::isfinite(v)) return format_real(v);
      return v;
    }
    nlohmann::ordered_json operator()(long long v) const { return v; }
    nlohmann::ordered_json operator()(const std::string& v) const { return v; }
    nlohmann::ordered_json operator()(bool v) const { return v; }
  };
  return std::visit(Visitor{}, c);
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "# command: " << command << "\n";
  for (const auto& [k, v] : config) os << "# " << k << ": " << v << "\n";
  os << "# seed: " << seed << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_quote(columns[i]);
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_quote(cell_text(row[i]));
    os << "\n";
  }
  os << "# verdict: " << (verdict ? "pass" : "fail") << "\n";
  return os.str();
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = cfg;
  j["seed"] = seed;
  nlohmann::ordered_json rs = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size() && i < columns.size(); ++i) r[columns[i]] = cell_json(row[i]);
    rs.push_back(r);
  }
  j["rows"] = rs;
  j["verdict"] = verdict ? "pass" : "fail";
  return j;
}

std::string Report::render(Format format) const {
  if (format == Format::json) return to_json().dump(2) + "\n";
  return to_csv();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Dual-product stabilized mixed discretizations: checks and experiments"};
  app.require_subcommand(1);

  struct Options {
    std::string config, out, format, gamma, pressure, w, s, levels, reaction;
    long long seed = -1;
    int truth_elems = 0, coarse_elems = 0;
    bool truth_check = false;
  };
  std::map<std::string, Options> opts;
  for (const auto& name : kCommands) {
    auto* sub = app.add_subcommand(name);
    Options& o = opts[name];
    sub->add_option("--config", o.config, "key = value configuration file");
    sub->add_option("--out", o.out, "output file (default stdout)");
    sub->add_option("--format", o.format, "csv or json");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--gamma", o.gamma, "gamma value, auto or auto:<fraction>");
    sub->add_option("--truth-elems", o.truth_elems, "truth mesh elements");
    sub->add_option("--coarse-elems", o.coarse_elems, "coarse mesh elements");
    sub->add_option("--pressure", o.pressure, "p1 or p0");
    sub->add_option("--w", o.w, "refined:<k>, truth or same");
    sub->add_option("--s", o.s, "gramian, scaled:<sigma> or lumped");
    sub->add_option("--levels", o.levels, "comma separated coarse sizes");
    sub->add_option("--reaction", o.reaction, "reaction coefficient");
    sub->add_flag("--truth-check", o.truth_check, "converge: repeat on a finer truth mesh");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const Options& o = opts[command];
  RunConfig cfg;
  try {
    std::vector<std::map<std::string, std::string>> layers;
    if (!o.config.empty()) layers.push_back(read_config_file(o.config));
    std::map<std::string, std::string> flags;
    auto put = [&](const char* key, const std::string& v) {
      if (!v.empty()) flags[key] = v;
    };
    put("out", o.out);
    put("format", o.format);
    put("gamma", o.gamma);
    put("pressure", o.pressure);
    put("w", o.w);
    put("s", o.s);
    put("levels", o.levels);
    put("reaction", o.reaction);
    if (o.seed >= 0) flags["seed"] = std::to_string(o.seed);
    if (o.truth_elems) flags["truth_elems"] = std::to_string(o.truth_elems);
    if (o.coarse_elems) flags["coarse_elems"] = std::to_string(o.coarse_elems);
    if (o.truth_check) flags["truth_check"] = "true";
    layers.push_back(flags);
    cfg = make_run_config(command, layers);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error [" << e.field() << "]: " << e.what() << "\n";
    return 2;
  } catch (const NestingViolated& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  }

  try {
    const Report report = run_command(cfg);
    const std::string text = report.render(cfg.format);
    if (cfg.out) {
      write_atomic(*cfg.out, text);
    } else {
      std::cout << text;
    }
    return report.verdict ? 0 : 1;
  } catch (const BoundViolated& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error [" << e.field() << "]: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace dualstab::cli
