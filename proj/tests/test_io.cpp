#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "facetflow/io.hpp"

using namespace facetflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const char* tag) {
  fs::path d = fs::temp_directory_path() / (std::string("facetflow_test_") + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

nlohmann::json sample_config_json() {
  return nlohmann::json::parse(R"({
    "operator": {"kind": "TV_PLUS_LINEAR"},
    "force": {
      "base": [[0.0, 1.0, 4.0]],
      "ramp": [[0.375, 0.625, -2.0], [0.25, 0.75, 1.0]],
      "time_law": "CLIPPED_RAMP",
      "cap": 16.0,
      "global_sign": -1.0
    },
    "grid": {"n_cells": 256},
    "time": {"tau": 0.002, "T": 36.0, "snapshot_times": [2.0, 36.0]},
    "tolerances": {"steady_tol": 1e-9, "eps_stag": 1e-6},
    "experiment": {"name": "breaking", "alpha": 16.0},
    "output_dir": "out"
  })");
}

}  // namespace

TEST_CASE("config: parses the documented schema") {
  RunConfig c = parse_config(sample_config_json());
  CHECK(c.op.kind == OperatorKind::TvPlusLinear);
  CHECK(c.has_force);
  CHECK(c.force.cap == doctest::Approx(16.0));
  CHECK(c.force.global_sign == doctest::Approx(-1.0));
  CHECK(c.n_cells == 256);
  CHECK(c.tau == doctest::Approx(0.002));
  CHECK(c.snapshot_times.size() == 2);
  CHECK(c.experiment == "breaking");
  CHECK(c.alpha == doctest::Approx(16.0));
  CHECK(c.output_dir == "out");
}

TEST_CASE("config: unknown keys are rejected with their path") {
  nlohmann::json j = sample_config_json();
  j["force"]["bogus"] = 1;
  try {
    parse_config(j);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("force") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }

  nlohmann::json top = sample_config_json();
  top["extra_section"] = nlohmann::json::object();
  CHECK_THROWS_AS(parse_config(top), ConfigError);
}

TEST_CASE("config: malformed values are rejected") {
  nlohmann::json j = sample_config_json();
  j["force"]["base"] = {{0.9, 0.3, 1.0}};  // reversed interval
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = sample_config_json();
  j["force"]["base"] = {{0.0, 1.0}};  // wrong arity
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = sample_config_json();
  j["grid"]["n_cells"] = 2.5;
  CHECK_THROWS_AS(parse_config(j), ConfigError);

  j = sample_config_json();
  j["operator"]["kind"] = "SOMETHING";
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config: custom regular operator table") {
  nlohmann::json j = sample_config_json();
  j["operator"] = {{"kind", "TV_PLUS_REGULAR"},
                   {"regular", {{"breaks", {0.0}}, {"coeffs", {{0.0, 1.0}, {0.0, 2.0}}}}}};
  RunConfig c = parse_config(j);
  CHECK(c.op.kind == OperatorKind::TvPlusRegular);
  CHECK(c.op.regular_value(2.0) == doctest::Approx(4.0));

  // Non-monotone tables are refused at parse time.
  j["operator"]["regular"]["coeffs"] = {{0.0, -1.0}, {0.0, 2.0}};
  CHECK_THROWS_AS(parse_config(j), ConfigError);
}

TEST_CASE("config: echo round-trips to an equivalent config") {
  RunConfig c = parse_config(sample_config_json());
  RunConfig c2 = parse_config(c.echo());
  CHECK(c.echo().dump() == c2.echo().dump());
}

TEST_CASE("format_double round-trips doubles exactly") {
  for (double v : {1.0 / 3.0, 0.1, -1e-17, 6.5509709141928062e-12, 12.25, 0.0}) {
    std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("profile files round-trip exactly") {
  fs::path d = temp_dir("profile");
  Grid g(16);
  Profile u = Profile::zeros(g);
  for (int i = 1; i < 16; ++i) u[i] = std::sin(0.37 * i) / 3.0;
  write_profile((d / "u.txt").string(), u, g);
  Grid g2(4);
  Profile v = read_profile((d / "u.txt").string(), &g2);
  CHECK(g2.n_cells == 16);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] == v[i]);
  CHECK_THROWS(read_profile((d / "missing.txt").string()));
}

TEST_CASE("emit_report writes the deterministic artifact set") {
  fs::path d1 = temp_dir("emit1");
  fs::path d2 = temp_dir("emit2");
  Grid g(16);

  ExperimentReport rep;
  rep.scenario = "demo";
  rep.parameters = {{"T", 0.02}};
  rep.add_check("always", 1.0, 1.0, 0.0, true);
  rep.trajectory.tau = 0.01;
  rep.trajectory.times = {0.01, 0.02};
  rep.trajectory.ut_sup = {0.1, 0.05};
  rep.trajectory.tv_of_slope = {0.4, 0.4};
  rep.trajectory.linf_to_initial = {0.0, 0.0};
  rep.trajectory.facet_count = {0, 0};
  rep.trajectory.final_profile = Profile::zeros(g);
  rep.wallclock_seconds = 123.0;  // must not appear in any file

  nlohmann::json cfg = sample_config_json();
  emit_report(rep, cfg, d1.string(), g);
  emit_report(rep, cfg, d2.string(), g);

  CHECK(fs::exists(d1 / "report.txt"));
  CHECK(fs::exists(d1 / "diagnostics.csv"));
  // No snapshots recorded: the final profile is the single snapshot.
  int snapshot_files = 0;
  for (const auto& e : fs::directory_iterator(d1))
    if (e.path().filename().string().rfind("snapshot_", 0) == 0) ++snapshot_files;
  CHECK(snapshot_files == 1);

  std::string report = slurp(d1 / "report.txt");
  CHECK(report.find("status PASS") != std::string::npos);
  CHECK(report.find("PASS always") != std::string::npos);
  CHECK(report.find("123") == std::string::npos);  // wall-clock stays out

  std::string csv = slurp(d1 / "diagnostics.csv");
  CHECK(csv.rfind("step,time,ut_sup,tv_slope,l2_to_target,n_facets\n", 0) == 0);

  // Byte-identical rerun.
  CHECK(slurp(d1 / "report.txt") == slurp(d2 / "report.txt"));
  CHECK(slurp(d1 / "diagnostics.csv") == slurp(d2 / "diagnostics.csv"));
}

TEST_CASE("check_line format is machine-greppable") {
  CheckResult c{"thing", 2.0, 1.5, 0.1, false};
  std::string line = check_line(c);
  CHECK(line.rfind("FAIL thing ", 0) == 0);
  CHECK(line.find("expected=2") != std::string::npos);
  CHECK(line.find("observed=1.5") != std::string::npos);
}

TEST_CASE("load_config: missing file raises ConfigError") {
  CHECK_THROWS_AS(load_config("/nonexistent/path/config.json"), ConfigError);
}
