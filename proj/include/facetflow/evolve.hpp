#ifndef FACETFLOW_EVOLVE_HPP
#define FACETFLOW_EVOLVE_HPP

#include <optional>
#include <vector>

#include "facetflow/facets.hpp"
#include "facetflow/model.hpp"
#include "facetflow/prox.hpp"

namespace facetflow {

struct Snapshot {
  int step = 0;
  double time = 0.0;
  Profile profile;
  FacetSet facets;
};

/// Per-step diagnostic series of one trajectory; the discrete surrogates
/// of the regularity conclusions (sup |u_t|, TV of the slope).
struct TrajectoryReport {
  std::vector<double> times;            // end-of-step times, strictly increasing
  std::vector<double> ut_sup;           // max_i |u^{n+1}_i - u^n_i| / tau
  std::vector<double> tv_of_slope;      // TV of the slope sequence after the step
  std::vector<double> l2_to_target;     // empty when no target supplied
  std::vector<double> linf_to_initial;  // sup distance to u0 after the step
  std::vector<int> facet_count;         // detected facets after the step
  std::vector<Snapshot> snapshots;
  Profile final_profile;
  double tau = 0.0;

  double max_ut_sup() const;
  /// Worst single-step growth factor of tv_of_slope after the grace
  /// period, measured against (tv + floor).
  double worst_tv_growth(double floor_value) const;
};

struct EvolveOptions {
  double tol = 0.0;  // 0 = per-step default
  std::vector<double> snapshot_times;
  std::optional<Profile> target;
  double slope_tol = 0.0;   // 0 = grid default
  double min_length = 0.0;  // 0 = grid default
};

/// Runs ceil(T/tau) implicit steps with the force slice taken at the
/// end-of-step time. Deterministic. Step-solver failures are rethrown
/// with the step index.
TrajectoryReport evolve(const Profile& u0, const ForceField& force, const OperatorSpec& op,
                        double tau, double T, const Grid& grid, const EvolveOptions& opts = {});

struct UtBoundCheck {
  bool pass = false;
  double observed = 0.0;
  double bound = 0.0;
  double margin = 0.0;
};

/// Discrete check of the sup|u_t| a-priori bound: max ut_sup over steps
/// against ut0 + f_t_integral plus the configured slack.
UtBoundCheck check_ut_bound(const TrajectoryReport& report, double f_t_integral, double ut0,
                            double slack_fraction = 0.1, double slack_abs = -1.0);

double total_variation_of_slope(const Profile& u, const Grid& grid);

}  // namespace facetflow

#endif  // FACETFLOW_EVOLVE_HPP
