// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on
// any failure. Desk scale: n_cells = 1024, tau = 1e-3 (sweep at 2048).
#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "facetflow/evolve.hpp"
#include "facetflow/experiments.hpp"
#include "facetflow/facets.hpp"
#include "facetflow/model.hpp"
#include "facetflow/prox.hpp"
#include "facetflow/steady.hpp"

using namespace facetflow;

namespace {

int failures = 0;

void criterion(int num, const std::string& what, const std::function<std::string()>& body) {
  std::string detail;
  bool pass = true;
  try {
    detail = body();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  if (detail.rfind("FAIL", 0) == 0) pass = false;
  std::cout << (pass ? "PASS" : "FAIL") << " criterion " << num << ": " << what;
  if (!detail.empty()) std::cout << " [" << (pass ? detail : detail.substr(detail[0] == 'F' ? 5 : 0)) << "]";
  std::cout << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

const OperatorSpec kL1 = OperatorSpec::tv_plus_linear();

bool report_check(const ExperimentReport& rep, const std::string& name, double* observed = nullptr) {
  for (const auto& c : rep.checks)
    if (c.name == name) {
      if (observed) *observed = c.observed;
      return c.pass;
    }
  return false;
}

}  // namespace

int main() {
  const Grid grid(1024);
  const double tau = 1e-3;
  ExperimentOptions opts;
  opts.tau = tau;

  // The alpha = 16 breaking run is shared by criteria 4, 5, 8 and 11.
  ExperimentReport breaking16 = run_breaking(16.0, 0.0, grid, opts);

  criterion(1, "constant-force steady state: facet [1/4, 3/4] at the oracle level -1/8", [&] {
    PiecewiseConstant F{{0.0, 1.0}, {4.0}};
    SteadyNumericResult r = solve_steady_numeric(kL1, F, grid, 1e-9);
    FacetSet fs = detect_facets(r.u, grid, default_slope_tol(grid), default_min_length(grid));
    std::vector<Facet> ex = fs.extrema();
    if (ex.size() != 1) return std::string("FAIL facet count ") + fmt(double(ex.size()));
    const Facet& f = ex[0];
    double h = grid.h;
    if (std::abs(f.left - 0.25) > 2.0 * h || std::abs(f.right - 0.75) > 2.0 * h)
      return "FAIL endpoints [" + fmt(f.left) + ", " + fmt(f.right) + "]";
    // Pinned to the independently derived level -1/8 (the variational
    // minimizer), not the -1/32 sometimes quoted.
    if (std::abs(f.level - (-0.125)) > 5e-3) return "FAIL level " + fmt(f.level);
    return "level " + fmt(f.level) + ", endpoints [" + fmt(f.left) + ", " + fmt(f.right) + "]";
  });

  criterion(2, "three-facet steady state at alpha = 16 matches the closed form", [&] {
    double c = three_facet_c(16.0), e = three_facet_e(16.0);
    double compat = (0.375 - c) * 20.0 + (e - 0.375) * (-12.0);
    if (std::abs(compat) > 1e-12) return "FAIL compatibility " + fmt(compat);
    if (std::abs(c - 0.35) > 1e-14 || std::abs(e - (0.5 - 1.0 / 12.0)) > 1e-14)
      return std::string("FAIL endpoints");
    SteadyNumericResult r = solve_steady_numeric(kL1, f_alpha_slice(16.0), grid, 1e-9);
    Profile exact = solve_three_facet(kL1, 16.0).sample(grid);
    double d = sup_distance(r.u, exact);
    if (d > 2.0 * grid.h) return "FAIL sup distance " + fmt(d);
    return "sup distance " + fmt(d) + " <= 2h";
  });

  criterion(3, "breaking threshold: sweep {8,10,11,13,16,24} bisects to 12 +- 0.5 (n = 2048)",
            [&] {
              Grid g2(2048);
              SweepResult s = alpha_sweep({8.0, 10.0, 11.0, 13.0, 16.0, 24.0}, g2, 0.5, opts);
              for (const auto& r : s.reports) {
                double a = r.parameters[0].second;
                if (r.broke != (a > 12.0)) return "FAIL wrong outcome at alpha " + fmt(a);
                if (!r.all_pass()) return "FAIL run checks at alpha " + fmt(a);
              }
              if (!s.threshold_bracketed) return std::string("FAIL not bracketed");
              if (std::abs(s.threshold_estimate - 12.0) > 0.5)
                return "FAIL estimate " + fmt(s.threshold_estimate);
              return "estimate " + fmt(s.threshold_estimate);
            });

  criterion(4, "stagnation phase of the alpha = 16 run up to t = 12 - 5 tau", [&] {
    double u0_sup = breaking16.initial_profile.sup_norm();
    double worst = 0.0;
    for (std::size_t i = 0; i < breaking16.trajectory.times.size(); ++i)
      if (breaking16.trajectory.times[i] <= 12.0 - 5.0 * tau)
        worst = std::max(worst, breaking16.trajectory.linf_to_initial[i]);
    if (worst > 1e-6 * u0_sup) return "FAIL moved " + fmt(worst);
    return "max move " + fmt(worst) + " vs budget " + fmt(1e-6 * u0_sup);
  });

  criterion(5, "post-ramp convergence: monotone distance, fitted log slope <= -9", [&] {
    if (!report_check(breaking16, "distance_monotone_after_cap"))
      return std::string("FAIL distance not monotone");
    double slope = fitted_decay_slope(breaking16.trajectory, 17.0, 21.0);
    if (slope > -9.0) return "FAIL slope " + fmt(slope);
    return "slope " + fmt(slope);
  });

  criterion(6, "zero-data stagnation under the band condition, motion without it", [&] {
    ForceField sine = sampled_sine_force(1.0, 64);
    ExperimentReport still = run_stagnation_zero(sine, kL1, 1.0, grid, opts);
    double moved = still.trajectory.final_profile.sup_norm();
    for (double v : still.trajectory.linf_to_initial) moved = std::max(moved, v);
    if (moved > 1e-8) return "FAIL sine case moved " + fmt(moved);

    ForceField f4;
    f4.base = {{0.0, 1.0, 4.0}};
    ExperimentReport moving = run_stagnation_zero(f4, kL1, 5.0, grid, opts);
    double endsup = moving.trajectory.final_profile.sup_norm();
    if (endsup <= 1e-2) return "FAIL negative control static, sup " + fmt(endsup);
    if (!moving.all_pass()) return std::string("FAIL negative-control checks");
    return "band case " + fmt(moved) + ", control sup " + fmt(endsup);
  });

  criterion(7, "steady-state stagnation under the sub-threshold ramp (cap 10, T = 20)", [&] {
    ExperimentReport r = run_stagnation_steady(10.0, 20.0, grid, true, opts);
    bool conditions = false;
    for (const auto& p : r.parameters)
      if (p.first == "conditions_hold") conditions = p.second == 1.0;
    if (!conditions) return std::string("FAIL spade conditions rejected");
    double worst = 0.0;
    if (!report_check(r, "steady_state_static", &worst))
      return "FAIL moved " + fmt(worst);
    return "max move " + fmt(worst);
  });

  criterion(8, "creation bound holds at snapshots of every trajectory", [&] {
    ExperimentReport tent = run_creation(ForceField{}, tent_profile(grid, 0.5, 0.1), kL1, 0.1,
                                         grid, opts);
    if (!tent.all_pass()) return std::string("FAIL tent run");
    double deficit_tent = 0.0, deficit_break = 0.0;
    report_check(tent, "creation_length_bound", &deficit_tent);
    if (!report_check(breaking16, "creation_length_bound", &deficit_break))
      return std::string("FAIL breaking-run bound");
    return "worst deficits " + fmt(deficit_tent) + ", " + fmt(deficit_break);
  });

  criterion(9, "resolvent matches the brute-force oracle on 100 random instances", [&] {
    std::mt19937 rng(987654321);
    std::uniform_real_distribution<double> gv(-0.3, 0.3), fv(-2.0, 2.0), tv(0.05, 0.5);
    std::uniform_int_distribution<int> nv(4, 6);
    double worst_diff = 0.0, worst_res = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      int n = nv(rng);
      OperatorSpec op = (trial % 3 == 0)   ? OperatorSpec::tv_only()
                        : (trial % 3 == 1) ? kL1
                                           : OperatorSpec::tv_plus_regular(RegularPart(
                                                 {0.0}, {{0.0, 1.0}, {0.0, 3.0}}));
      std::vector<double> g(n + 1, 0.0);
      for (int i = 1; i < n; ++i) g[i] = gv(rng);
      std::vector<double> f(n);
      for (int k = 0; k < n; ++k) f[k] = fv(rng);
      StepProblem p(Profile(std::move(g)), std::move(f), tv(rng), op, Grid(n));
      StepResult r = implicit_step(p, 1e-10);
      Profile oracle = brute_force_step_oracle(p, 1e-5);
      worst_diff = std::max(worst_diff, sup_distance(r.u, oracle));
      worst_res = std::max(worst_res, r.cert.residual);
    }
    if (worst_diff > 1e-4) return "FAIL worst oracle gap " + fmt(worst_diff);
    if (worst_res > 1e-10) return "FAIL worst residual " + fmt(worst_res);
    return "worst gap " + fmt(worst_diff) + ", worst residual " + fmt(worst_res);
  });

  criterion(10, "monotone properties: L2 contraction, comparison, steady ordering", [&] {
    std::mt19937 rng(13572468);
    std::uniform_real_distribution<double> gv(-0.3, 0.3), fv(-2.0, 2.0), tv(0.05, 0.5),
        bump(0.0, 0.2);
    const int n = 16;
    Grid g(n);
    for (int trial = 0; trial < 100; ++trial) {
      OperatorSpec op = trial % 2 == 0 ? kL1 : OperatorSpec::tv_only();
      double t = tv(rng);
      std::vector<double> g1(n + 1, 0.0), g2(n + 1, 0.0), f(n);
      for (int i = 1; i < n; ++i) {
        g1[i] = gv(rng);
        g2[i] = gv(rng);
      }
      for (int k = 0; k < n; ++k) f[k] = fv(rng);
      StepProblem p1(Profile(g1), f, t, op, g);
      StepProblem p2(Profile(g2), f, t, op, g);
      StepResult r1 = implicit_step(p1, 1e-11);
      StepResult r2 = implicit_step(p2, 1e-11);
      if (l2_distance(r1.u, r2.u, g.h) > l2_distance(p1.g, p2.g, g.h) + 1e-12)
        return "FAIL contraction at trial " + fmt(trial);

      std::vector<double> g3 = g1, f3 = f;
      for (int i = 1; i < n; ++i) g3[i] += bump(rng);
      for (int k = 0; k < n; ++k) f3[k] += bump(rng);
      StepProblem p3(Profile(g3), f3, t, op, g);
      StepResult r3 = implicit_step(p3, 1e-11);
      for (int i = 0; i <= n; ++i)
        if (r1.u[i] > r3.u[i] + 1e-12) return "FAIL comparison at trial " + fmt(trial);
    }
    Profile u16 = solve_three_facet(kL1, 16.0).sample(grid);
    Profile u24 = solve_three_facet(kL1, 24.0).sample(grid);
    for (std::size_t i = 0; i < u16.size(); ++i)
      if (u16[i] > u24[i] + 1e-12) return std::string("FAIL steady ordering");
    return std::string("100 pairs + nodewise ordering");
  });

  criterion(11, "time-derivative diagnostic: max ut_sup within the ramp budget", [&] {
    double budget = (0.0 + 2.0 * 16.0) * 1.1;
    double observed = breaking16.trajectory.max_ut_sup();
    if (observed > budget) return "FAIL observed " + fmt(observed);
    return "observed " + fmt(observed) + " vs budget " + fmt(budget);
  });

  if (failures) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
