#ifndef FACETFLOW_PROX_HPP
#define FACETFLOW_PROX_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "facetflow/model.hpp"

namespace facetflow {

/// One backward-Euler step: find u minimizing
///   sum_i h (u_i - g_i)^2 / (2 tau) + sum_k h W(Du_k) - sum_i h f_i u_i
/// over Dirichlet profiles, where f_i is the nodal force obtained by
/// averaging the two adjacent per-cell values.
struct StepProblem {
  Profile g;
  std::vector<double> f_cells;  // per-cell force values (equation-side f)
  double tau = 0.0;
  OperatorSpec op;
  Grid grid;

  StepProblem(Profile g_, std::vector<double> f_, double tau_, OperatorSpec op_, Grid grid_);

  /// Nodal force at interior node i (1..n-1).
  double node_force(int i) const { return 0.5 * (f_cells[i - 1] + f_cells[i]); }
  double scale() const;  // tolerance scale max(1, |g|_inf/tau + |f|_inf)
};

/// Per-edge flux certificate for a step solution. The flux satisfies the
/// discrete balance (u_i - g_i)/tau - (sigma_i - sigma_{i-1})/h = f_i
/// exactly; residual is the worst inclusion distance dist(sigma_k, L(Du_k)).
struct StepCertificate {
  std::vector<double> flux;  // size n_cells, one per edge
  double residual = 0.0;
  double gap_estimate = 0.0;
};

struct StepResult {
  Profile u;
  StepCertificate cert;
};

/// Edge states used for warm starts across steps: 0 = fused (Du = 0),
/// +1 / -1 = signed slope.
using EdgePattern = std::vector<std::int8_t>;

struct SolverError : std::runtime_error {
  double best_residual;
  SolverError(const std::string& msg, double r) : std::runtime_error(msg), best_residual(r) {}
};

/// Solves the step problem with certified optimality (inclusion residual
/// <= tol). Throws SolverError with the best residual attained if the
/// iteration budget runs out. `warm` carries the edge pattern between
/// calls; pass nullptr for a cold start.
StepResult implicit_step(const StepProblem& p, double tol, EdgePattern* warm = nullptr);

double default_step_tol(const StepProblem& p);

/// The discrete objective the step minimizes (used by oracles and tests).
double step_objective(const StepProblem& p, const Profile& u);

/// Independent ground-truth minimizer for small grids: exhaustive lattice
/// search refined by coordinate and block descent. Refuses n_cells > 8.
Profile brute_force_step_oracle(const StepProblem& p, double resolution);

/// Max inclusion distance of a certificate flux, after checking that the
/// flux satisfies the discrete balance (else MALFORMED_CERTIFICATE).
double inclusion_residual(const Profile& u, const std::vector<double>& flux,
                          const StepProblem& p);

}  // namespace facetflow

#endif  // FACETFLOW_PROX_HPP
