// facetflow command-line front end: config ingestion, solver runs,
// deterministic artifact emission.
#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "facetflow/evolve.hpp"
#include "facetflow/experiments.hpp"
#include "facetflow/facets.hpp"
#include "facetflow/io.hpp"
#include "facetflow/model.hpp"
#include "facetflow/steady.hpp"

using namespace facetflow;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitChecksFailed = 2;

void print_checks(const ExperimentReport& rep) {
  for (const auto& c : rep.checks) std::cout << check_line(c) << '\n';
  std::cout << (rep.all_pass() ? "PASS" : "FAIL") << " scenario=" << rep.scenario
            << " wallclock_s=" << rep.wallclock_seconds << '\n';
}

ExperimentOptions make_opts(const RunConfig& cfg) {
  ExperimentOptions o;
  o.tau = cfg.tau;
  o.eps_stag = cfg.eps_stag;
  o.step_tol = cfg.step_tol;
  o.snapshot_times = cfg.snapshot_times;
  return o;
}

/// Report wrapper for the non-experiment subcommands so they share the
/// emission path.
ExperimentReport plain_report(std::string scenario) {
  ExperimentReport rep;
  rep.scenario = std::move(scenario);
  return rep;
}

int finish(const ExperimentReport& rep, const RunConfig& cfg, const Grid& grid) {
  emit_report(rep, cfg.echo(), cfg.output_dir, grid);
  print_checks(rep);
  return rep.all_pass() ? kExitOk : kExitChecksFailed;
}

int run_steady_cmd(RunConfig cfg, bool have_alpha, double alpha, bool have_A, double A) {
  Grid grid(cfg.n_cells);
  ExperimentReport rep = plain_report("steady");
  OperatorSpec op = cfg.op;
  Profile u;
  PiecewiseConstant F;

  if (have_alpha) {
    rep.parameters.push_back({"alpha", alpha});
    SteadySolution sol = solve_three_facet(op, alpha);
    u = sol.sample(grid);
    F = f_alpha_slice(alpha);
  } else if (have_A) {
    rep.parameters.push_back({"A", A});
    SteadySolution sol = solve_constant_force(op, A);
    u = sol.sample(grid);
    F.xs = {0.0, 1.0};
    F.vals = {A};
  } else {
    if (!cfg.has_force)
      throw ConfigError("steady: provide --alpha, --A, or a config with a force");
    // Steady problems read the force as the right-hand side F of
    // d/dx L(u_x) = F, frozen at full ramp.
    double t_freeze = cfg.force.law == TimeLaw::ClippedRamp ? cfg.force.cap : 0.0;
    F = cfg.force.slice(t_freeze);
    SteadyNumericResult r = solve_steady_numeric(op, F, grid, cfg.steady_tol);
    u = r.u;
    rep.parameters.push_back({"iterations", double(r.iterations)});
  }

  write_profile(cfg.output_dir.empty() ? "profile.txt" : cfg.output_dir + "/profile.txt", u,
                grid);
  VerifyReport v = verify_steady(u, op, F, grid, std::max(cfg.steady_tol,
                                                          2.0 * grid.h * F.sup_abs()));
  rep.add_upper_check("steady_inclusion_residual", v.violation,
                      std::max(cfg.steady_tol, 2.0 * grid.h * F.sup_abs()));

  FacetSet fs = detect_facets(u, grid, default_slope_tol(grid), default_min_length(grid));
  rep.parameters.push_back({"n_facets", double(fs.facets.size())});

  // Degenerate trajectory so the report carries the profile as the
  // single snapshot.
  rep.trajectory.tau = cfg.tau;
  rep.trajectory.times = {0.0};
  rep.trajectory.ut_sup = {0.0};
  rep.trajectory.tv_of_slope = {total_variation_of_slope(u, grid)};
  rep.trajectory.linf_to_initial = {0.0};
  rep.trajectory.facet_count = {static_cast<int>(fs.facets.size())};
  rep.trajectory.final_profile = u;
  return finish(rep, cfg, grid);
}

int run_evolve_cmd(RunConfig cfg, const std::string& u0_path) {
  if (!cfg.has_force) throw ConfigError("evolve: config must define a force");
  Grid grid(cfg.n_cells);
  Profile u0 = Profile::zeros(grid);
  if (!u0_path.empty()) {
    Grid gcheck(4);
    u0 = read_profile(u0_path, &gcheck);
    if (gcheck.n_cells != grid.n_cells)
      throw ConfigError("evolve: --u0 profile has " + std::to_string(gcheck.n_cells) +
                        " cells, config grid has " + std::to_string(grid.n_cells));
  }
  EvolveOptions eo;
  eo.tol = cfg.step_tol;
  eo.snapshot_times = cfg.snapshot_times;
  ExperimentReport rep = plain_report("evolve");
  rep.initial_profile = u0;
  rep.trajectory = evolve(u0, cfg.force, cfg.op, cfg.tau, cfg.T, grid, eo);
  rep.parameters = {{"T", cfg.T}, {"tau", cfg.tau}, {"n_cells", double(cfg.n_cells)}};
  rep.add_check("completed_steps", double(rep.trajectory.times.size()),
                double(rep.trajectory.times.size()), 0.0, true);
  return finish(rep, cfg, grid);
}

int run_analyze_cmd(RunConfig cfg, const std::string& profile_path) {
  Grid grid(4);
  Profile u = read_profile(profile_path, &grid);
  cfg.n_cells = grid.n_cells;
  FacetSet fs = detect_facets(u, grid, default_slope_tol(grid), default_min_length(grid));
  ExperimentReport rep = plain_report("analyze");
  rep.parameters = {{"n_cells", double(grid.n_cells)},
                    {"n_facets", double(fs.facets.size())},
                    {"n_extrema", double(fs.extrema().size())},
                    {"sup_norm", u.sup_norm()}};
  rep.trajectory.tau = cfg.tau;
  rep.trajectory.times = {0.0};
  rep.trajectory.ut_sup = {0.0};
  rep.trajectory.tv_of_slope = {total_variation_of_slope(u, grid)};
  rep.trajectory.linf_to_initial = {0.0};
  rep.trajectory.facet_count = {static_cast<int>(fs.facets.size())};
  rep.trajectory.final_profile = u;
  return finish(rep, cfg, grid);
}

int run_sweep_cmd(RunConfig cfg) {
  if (cfg.alpha_list.empty())
    throw ConfigError("sweep: provide --alpha-list or experiment.alpha_list in the config");
  Grid grid(cfg.n_cells);
  SweepResult sweep = alpha_sweep(cfg.alpha_list, grid, cfg.delta, make_opts(cfg));

  bool all_ok = true;
  for (std::size_t i = 0; i < sweep.reports.size(); ++i) {
    const ExperimentReport& r = sweep.reports[i];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "run_%zu_alpha_%.6g", i, r.parameters[0].second);
    RunConfig sub = cfg;
    sub.output_dir = cfg.output_dir + "/" + buf;
    sub.alpha = r.parameters[0].second;
    sub.experiment = "breaking";
    emit_report(r, sub.echo(), sub.output_dir, grid);
    all_ok = all_ok && r.all_pass();
  }

  ExperimentReport summary = plain_report("alpha_sweep");
  summary.parameters = {{"n_runs", double(sweep.reports.size())},
                        {"threshold_estimate", sweep.threshold_estimate},
                        {"threshold_bracketed", sweep.threshold_bracketed ? 1.0 : 0.0},
                        {"delta", cfg.delta}};
  for (const auto& r : sweep.reports)
    summary.add_check("broke_alpha_" + format_double(r.parameters[0].second),
                      r.parameters[0].second > 12.0 ? 1.0 : 0.0, r.broke ? 1.0 : 0.0, 0.0,
                      r.broke == (r.parameters[0].second > 12.0));
  if (!sweep.threshold_check.name.empty()) summary.checks.push_back(sweep.threshold_check);
  summary.add_check("all_runs_pass", 1.0, all_ok ? 1.0 : 0.0, 0.0, all_ok);
  std::cout << "threshold note: " << sweep.threshold_note << '\n';
  emit_report(summary, cfg.echo(), cfg.output_dir, grid);
  print_checks(summary);
  return summary.all_pass() && all_ok ? kExitOk : kExitChecksFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facetflow: 1D flow u_t = d/dx L(u_x) + f with a jump-monotone operator"};
  app.require_subcommand(1);

  std::string config_path, out_dir, u0_path, profile_path;
  double alpha = 16.0, A = 4.0, cap = -1.0, T = -1.0, tau = -1.0, delta = -1.0;
  int n = -1;
  bool unbalanced = false;
  std::vector<double> alpha_list;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--out", out_dir, "output directory (required)")->required();
    cmd->add_option("--n", n, "grid cells override");
    cmd->add_option("--tau", tau, "time step override");
    cmd->add_option("--T", T, "final time override");
  };

  CLI::App* steady = app.add_subcommand("steady", "stationary solve d/dx L(u_x) = F");
  add_common(steady);
  auto* opt_alpha_s = steady->add_option("--alpha", alpha, "three-facet family parameter");
  auto* opt_A = steady->add_option("--A", A, "constant force amplitude");

  CLI::App* evolve_cmd = app.add_subcommand("evolve", "time integration from a profile");
  add_common(evolve_cmd);
  evolve_cmd->add_option("--u0", u0_path, "initial profile file (default: zero)");

  CLI::App* analyze = app.add_subcommand("analyze", "facet detection on a profile file");
  add_common(analyze);
  analyze->add_option("--profile", profile_path, "two-column profile file")->required();

  CLI::App* exp = app.add_subcommand("experiment", "scenario harness");
  exp->require_subcommand(1);
  std::vector<CLI::App*> exp_cmds;
  CLI::App* e_sz = exp->add_subcommand("stagnation-zero", "band condition on zero data");
  CLI::App* e_ss = exp->add_subcommand("stagnation-steady", "perturbed steady facet");
  CLI::App* e_cr = exp->add_subcommand("creation", "facet creation at extrema");
  CLI::App* e_br = exp->add_subcommand("breaking", "ramped facet breaking");
  CLI::App* e_sw = exp->add_subcommand("sweep", "breaking threshold bisection");
  for (CLI::App* c : {e_sz, e_ss, e_cr, e_br, e_sw}) add_common(c);
  e_ss->add_option("--cap", cap, "ramp cap");
  e_ss->add_flag("--unbalanced", unbalanced, "drop the mean-preserving ramp term");
  e_cr->add_option("--u0", u0_path, "initial profile file (default: tent)");
  auto* opt_alpha_b = e_br->add_option("--alpha", alpha, "ramp strength");
  e_sw->add_option("--alpha-list", alpha_list, "sweep values");
  e_sw->add_option("--delta", delta, "bisection width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    if (n > 0) cfg.n_cells = n;
    if (tau > 0.0) cfg.tau = tau;
    if (T > 0.0) cfg.T = T;
    if (delta > 0.0) cfg.delta = delta;
    if (cap >= 0.0) cfg.ramp_cap = cap;
    if (!alpha_list.empty()) cfg.alpha_list = alpha_list;
    if (unbalanced) cfg.balanced = false;
    cfg.output_dir = out_dir;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir);
    Grid grid(cfg.n_cells);

    if (steady->parsed())
      return run_steady_cmd(cfg, opt_alpha_s->count() > 0, alpha, opt_A->count() > 0, A);
    if (evolve_cmd->parsed()) return run_evolve_cmd(cfg, u0_path);
    if (analyze->parsed()) return run_analyze_cmd(cfg, profile_path);

    ExperimentOptions opts = make_opts(cfg);
    if (e_sz->parsed()) {
      cfg.experiment = "stagnation_zero";
      ForceField force = cfg.has_force ? cfg.force : sampled_sine_force(1.0, 64);
      cfg.force = force;
      cfg.has_force = true;
      double T_run = T > 0.0 ? T : 1.0;
      cfg.T = T_run;
      return finish(run_stagnation_zero(force, cfg.op, T_run, grid, opts), cfg, grid);
    }
    if (e_ss->parsed()) {
      cfg.experiment = "stagnation_steady";
      double T_run = T > 0.0 ? T : 20.0;
      cfg.T = T_run;
      cfg.force = ramped_facet_force(cfg.ramp_cap, 1.0, cfg.balanced);
      cfg.has_force = true;
      return finish(run_stagnation_steady(cfg.ramp_cap, T_run, grid, cfg.balanced, opts), cfg,
                    grid);
    }
    if (e_cr->parsed()) {
      cfg.experiment = "creation";
      double T_run = T > 0.0 ? T : 0.2;
      cfg.T = T_run;
      Profile u0 = tent_profile(grid, 0.5, 0.1);
      if (!u0_path.empty()) {
        Grid gcheck(4);
        u0 = read_profile(u0_path, &gcheck);
        if (gcheck.n_cells != grid.n_cells)
          throw ConfigError("creation: --u0 profile does not match the grid");
      }
      ForceField force = cfg.has_force ? cfg.force : ForceField{};
      return finish(run_creation(force, u0, cfg.op, T_run, grid, opts), cfg, grid);
    }
    if (e_br->parsed()) {
      cfg.experiment = "breaking";
      if (opt_alpha_b->count() > 0) cfg.alpha = alpha;
      double T_run = T > 0.0 ? T : 0.0;
      ExperimentReport rep = run_breaking(cfg.alpha, T_run, grid, opts);
      cfg.T = T_run > 0.0 ? T_run : cfg.alpha + 20.0;
      cfg.force = ramped_facet_force(cfg.alpha, -1.0, true);
      cfg.has_force = true;
      return finish(rep, cfg, grid);
    }
    if (e_sw->parsed()) {
      cfg.experiment = "sweep";
      return run_sweep_cmd(cfg);
    }
    std::cerr << "no subcommand executed\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
