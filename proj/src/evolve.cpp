#include "facetflow/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace facetflow {

double total_variation_of_slope(const Profile& u, const Grid& grid) {
  double tv = 0.0;
  double prev = u.slope(0, grid.h);
  for (int k = 1; k < grid.n_cells; ++k) {
    double d = u.slope(k, grid.h);
    tv += std::abs(d - prev);
    prev = d;
  }
  return tv;
}

double TrajectoryReport::max_ut_sup() const {
  double m = 0.0;
  for (double v : ut_sup) m = std::max(m, v);
  return m;
}

double TrajectoryReport::worst_tv_growth(double floor_value) const {
  double worst = 0.0;
  for (std::size_t i = 10; i + 1 < tv_of_slope.size(); ++i) {
    double denom = tv_of_slope[i] + floor_value;
    if (denom > 0.0) worst = std::max(worst, tv_of_slope[i + 1] / denom);
  }
  return worst;
}

TrajectoryReport evolve(const Profile& u0, const ForceField& force, const OperatorSpec& op,
                        double tau, double T, const Grid& grid, const EvolveOptions& opts) {
  if (!(tau > 0.0) || !(T >= tau)) throw std::invalid_argument("evolve: need tau > 0, T >= tau");
  if (static_cast<int>(u0.size()) != grid.n_nodes())
    throw std::invalid_argument("evolve: profile/grid size mismatch");
  force.validate();

  const int n_steps = static_cast<int>(std::ceil(T / tau - 1e-12));
  const double slope_tol = opts.slope_tol > 0.0 ? opts.slope_tol : default_slope_tol(grid);
  const double min_length = opts.min_length > 0.0 ? opts.min_length : default_min_length(grid);

  // Map each requested snapshot time to the first step that reaches it.
  std::set<int> snap_steps;
  for (double s : opts.snapshot_times) {
    // Clamp before the integer cast: huge times must not overflow int.
    double idx = std::ceil(s / tau - 1e-9);
    snap_steps.insert(static_cast<int>(std::clamp(idx, 1.0, double(n_steps))));
  }

  TrajectoryReport rep;
  rep.tau = tau;
  rep.times.reserve(n_steps);
  rep.ut_sup.reserve(n_steps);
  rep.tv_of_slope.reserve(n_steps);

  Profile u = u0;
  EdgePattern warm;
  for (int step = 1; step <= n_steps; ++step) {
    const double t = step * tau;
    std::vector<double> f_cells(grid.n_cells);
    for (int k = 0; k < grid.n_cells; ++k) f_cells[k] = force.eval(grid.cell_mid(k), t);

    StepProblem p(u, std::move(f_cells), tau, op, grid);
    double tol = opts.tol > 0.0 ? opts.tol : default_step_tol(p);
    StepResult r;
    try {
      r = implicit_step(p, tol, &warm);
    } catch (const SolverError& e) {
      throw SolverError("evolve: step " + std::to_string(step) + " failed: " + e.what(),
                        e.best_residual);
    }

    double dmax = sup_distance(r.u, u);
    u = std::move(r.u);

    rep.times.push_back(t);
    rep.ut_sup.push_back(dmax / tau);
    rep.tv_of_slope.push_back(total_variation_of_slope(u, grid));
    rep.linf_to_initial.push_back(sup_distance(u, u0));
    if (opts.target) rep.l2_to_target.push_back(l2_distance(u, *opts.target, grid.h));

    FacetSet fs = detect_facets(u, grid, slope_tol, min_length);
    rep.facet_count.push_back(static_cast<int>(fs.facets.size()));
    if (snap_steps.count(step)) rep.snapshots.push_back({step, t, u, std::move(fs)});
  }
  rep.final_profile = u;
  return rep;
}

UtBoundCheck check_ut_bound(const TrajectoryReport& report, double f_t_integral, double ut0,
                            double slack_fraction, double slack_abs) {
  if (report.times.empty()) throw std::invalid_argument("check_ut_bound: empty report");
  UtBoundCheck out;
  double slack = slack_abs >= 0.0 ? slack_abs : 10.0 * report.tau;
  out.observed = report.max_ut_sup();
  out.bound = (ut0 + f_t_integral) * (1.0 + slack_fraction) + slack;
  out.margin = out.bound - out.observed;
  out.pass = out.margin >= 0.0;
  return out;
}

}  // namespace facetflow
