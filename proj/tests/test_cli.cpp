#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dualstab/cli.hpp"
#include "dualstab/errors.hpp"

using namespace dualstab;
using namespace dualstab::cli;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "dualstab");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dualstab_test_" + name)).string();
}

RunConfig config(const std::string& cmd, std::map<std::string, std::string> kv = {}) {
  return make_run_config(cmd, {kv});
}

}  // namespace

TEST_CASE("key value parsing") {
  const auto kv = parse_key_values("# comment\ntruth_elems = 64\n\ns=lumped # trailing\n");
  CHECK(kv.at("truth_elems") == "64");
  CHECK(kv.at("s") == "lumped");
  CHECK_THROWS_AS(parse_key_values("novalue\n"), ConfigError);
}

TEST_CASE("config errors name the field") {
  try {
    config("solve", {{"coarse_elems", "24"}});
    FAIL("expected an error");
  } catch (const Error&) {
  }
  try {
    config("solve", {{"bogus", "1"}});
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "bogus");
  }
  try {
    config("solve", {{"truth_elems", "abc"}});
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "truth_elems");
  }
  CHECK_THROWS_AS(config("frobnicate"), ConfigError);
}

TEST_CASE("later layers override earlier ones") {
  const RunConfig c = make_run_config("constants", {{{"coarse_elems", "8"}}, {{"coarse_elems", "32"}}});
  CHECK(c.model.coarse_elems == 32);
}

TEST_CASE("converge sweeps dyadic levels by default") {
  const RunConfig c = config("converge");
  CHECK(c.resolved_levels() == std::vector<int>{16, 32, 64, 128});
  CHECK(config("solve").resolved_levels() == std::vector<int>{16});
}

TEST_CASE("constants table for the default model") {
  const Report r = cmd_constants(config("constants", {{"truth_elems", "64"}}));
  REQUIRE(r.rows.size() == 1);
  CHECK(std::get<double>(r.rows[0][1]) == doctest::Approx(1));  // alpha
  CHECK(std::get<double>(r.rows[0][2]) == doctest::Approx(1));  // norm_A
  const Report s = cmd_constants(config("constants", {{"truth_elems", "64"}, {"s", "scaled:2"}}));
  CHECK(std::get<double>(s.rows[0][5]) == doctest::Approx(2));  // kappa_star
  CHECK(std::get<double>(s.rows[0][6]) == doctest::Approx(2));  // K_star
}

TEST_CASE("W = truth reproduces the truth inf-sup constant") {
  const Report r = cmd_infsup(config("infsup", {{"truth_elems", "64"}, {"w", "truth"}}));
  CHECK(std::get<double>(r.rows[0][2]) == doctest::Approx(std::get<double>(r.rows[0][1])));
  CHECK(r.verdict);
}

TEST_CASE("every command passes on a small default model") {
  for (const auto& cmd : kCommands) {
    const Report r = run_command(config(cmd, {{"truth_elems", "64"}, {"coarse_elems", "8"}}));
    CHECK_MESSAGE(r.verdict, cmd);
  }
}

TEST_CASE("csv and json rendering") {
  Report r;
  r.command = "x";
  r.config = {{"a", "1"}};
  r.seed = 3;
  r.columns = {"name", "value", "flag", "count"};
  r.rows = {{std::string("n,1"), 0.1, true, 7LL}};
  const std::string csv = r.to_csv();
  CHECK(csv.find("\"n,1\",0.10000000000000001,true,7") != std::string::npos);
  CHECK(csv.find("# verdict: pass") != std::string::npos);
  const auto j = r.to_json();
  CHECK(j["command"] == "x");
  CHECK(j["seed"] == 3);
  CHECK(j["rows"][0]["value"] == 0.1);
  CHECK(j["verdict"] == "pass");
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("output is deterministic for a fixed seed") {
  const std::string a = tmp_path("a.csv"), b = tmp_path("b.csv");
  CHECK(run({"spectral", "--truth-elems", "64", "--out", a}) == 0);
  CHECK(run({"spectral", "--truth-elems", "64", "--out", b}) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK_FALSE(std::filesystem::exists(a + ".tmp"));
  std::remove(a.c_str());
  std::remove(b.c_str());
}

TEST_CASE("exit codes") {
  const std::string out = tmp_path("exit.json");
  CHECK(run({"solve", "--truth-elems", "64", "--format", "json", "--out", out}) == 0);
  CHECK(slurp(out).find("\"verdict\": \"pass\"") != std::string::npos);
  // gamma = 0 on the equal-order pair: the stabilized system is singular.
  CHECK(run({"solve", "--truth-elems", "64", "--gamma", "0", "--out", out}) == 1);
  CHECK(run({"solve", "--coarse-elems", "24"}) == 2);
  CHECK(run({"solve", "--format", "xml"}) == 2);
  CHECK(run({"solve", "--no-such-flag"}) == 2);
  CHECK(run({"solve", "--config", tmp_path("missing.cfg")}) == 2);
  // U x Q already contains the interpolant: quasi-optimality is undefined.
  CHECK(run({"converge", "--truth-elems", "32", "--levels", "32", "--w", "truth", "--pressure",
             "p0", "--out", out}) == 3);
  std::remove(out.c_str());
}

TEST_CASE("config file is read") {
  const std::string cfg = tmp_path("run.cfg");
  {
    std::ofstream o(cfg);
    o << "truth_elems = 64\ncoarse_elems = 8\nformat = json\n";
  }
  const std::string out = tmp_path("run.json");
  CHECK(run({"constants", "--config", cfg, "--out", out}) == 0);
  CHECK(slurp(out).find("\"coarse_elems\": \"8\"") != std::string::npos);
  std::remove(cfg.c_str());
  std::remove(out.c_str());
}
