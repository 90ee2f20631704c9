#ifndef FACETFLOW_IO_HPP
#define FACETFLOW_IO_HPP

#include <json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "facetflow/experiments.hpp"
#include "facetflow/model.hpp"

namespace facetflow {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Effective run configuration. Loaded from JSON with strict key
/// checking; scalar fields may be overridden by CLI flags before a run.
struct RunConfig {
  OperatorSpec op = OperatorSpec::tv_plus_linear();
  ForceField force;
  bool has_force = false;

  int n_cells = 1024;
  double tau = 1e-3;
  double T = 1.0;
  std::vector<double> snapshot_times;

  double step_tol = 0.0;    // 0 = solver default
  double steady_tol = 1e-9;
  double eps_stag = 1e-6;

  std::string experiment;  // experiment name when driven by config
  double alpha = 16.0;
  std::vector<double> alpha_list;
  double delta = 0.5;
  double ramp_cap = 10.0;
  bool balanced = true;

  std::string output_dir;

  /// Serializes the effective configuration; parse_config(echo()) gives
  /// back an equivalent RunConfig (the round-trip property).
  nlohmann::json echo() const;
};

/// Parses and validates; unknown keys are rejected with their JSON path.
RunConfig parse_config(const nlohmann::json& j, const std::string& where = "config");
RunConfig load_config(const std::string& path);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

/// Two-column (x, u) text, one row per node.
void write_profile(const std::string& path, const Profile& u, const Grid& grid);
/// Reads a two-column profile file; the grid is inferred from the rows.
Profile read_profile(const std::string& path, Grid* grid_out = nullptr);

void write_trajectory_csv(const std::string& path, const TrajectoryReport& traj);

/// Writes report.txt, diagnostics.csv and snapshot_<index>_t<time>.txt
/// into `dir` (created if missing). When the trajectory carries no
/// snapshots, the final profile is written as the single snapshot.
/// File contents are deterministic: wall-clock never enters them.
void emit_report(const ExperimentReport& rep, const nlohmann::json& config_echo,
                 const std::string& dir, const Grid& grid);

/// The stable per-check console/report line (PASS/FAIL prefix).
std::string check_line(const CheckResult& c);

}  // namespace facetflow

#endif  // FACETFLOW_IO_HPP
