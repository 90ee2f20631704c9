#ifndef FACETFLOW_STEADY_HPP
#define FACETFLOW_STEADY_HPP

#include <vector>

#include "facetflow/facets.hpp"
#include "facetflow/model.hpp"
#include "facetflow/prox.hpp"

namespace facetflow {

/// Polynomial piece u(x) = sum coef[k] * x^k on [a, b].
struct PolyPiece {
  double a = 0.0;
  double b = 0.0;
  std::vector<double> coef;

  double eval(double x) const;
  double deriv(double x) const;
};

/// Steady solution of d/dx L(u_x) = F with Dirichlet ends: closed-form
/// profile, facet list (the D0 components) and an admissible flux.
struct SteadySolution {
  std::vector<PolyPiece> pieces;
  std::vector<Facet> facets;
  std::vector<PolyPiece> flux;

  double eval(double x) const;
  double eval_flux(double x) const;
  Profile sample(const Grid& g) const;
};

/// Closed form for d/dx L1(u_x) = A, A >= 0: zero profile for A <= 2,
/// otherwise a single minimum facet of length 2/A centered at 1/2 with
/// parabolic arms.
SteadySolution solve_constant_force(const OperatorSpec& op, double A);

/// Facet endpoints of the broken steady state, from the energy
/// constraints; defined for alpha != 4 so the alpha = 12 limit values are
/// available to tests.
double three_facet_c(double alpha);
double three_facet_e(double alpha);

/// Closed form for d/dx L1(u_x) = f_alpha, alpha > 12: min facets
/// [1/4, c] and [1-c, 3/4], max facet [e, 1-e]. Throws
/// REFUSED_NO_BREAKING for alpha <= 12.
SteadySolution solve_three_facet(const OperatorSpec& op, double alpha);

/// The spatial family f_alpha = 4 + q [ -2 chi_[3/8,5/8] + chi_[1/4,3/4] ]
/// at fixed ramp value q, as an exact piecewise-constant function.
PiecewiseConstant f_alpha_slice(double q);

struct SteadyNumericResult {
  Profile u;
  std::vector<double> flux;  // per-edge steady flux
  double residual = 0.0;
  int iterations = 0;
};

/// Discrete minimizer of sum_k h W(Du_k) + sum_i h F_i u_i (the
/// variational form of d/dx L(u_x) = F), computed by proximal-point
/// iteration on the implicit step, certified by steady flux
/// reconstruction. Throws SolverError carrying the best residual if the
/// iteration budget is exhausted.
SteadyNumericResult solve_steady_numeric(const OperatorSpec& op, const PiecewiseConstant& F,
                                         const Grid& grid, double tol);

struct VerifyReport {
  bool pass = false;
  double violation = 0.0;
  double location = 0.0;  // x where the worst violation occurs
  double sigma0 = 0.0;    // chosen integration constant
};

/// Reconstructs sigma(x) = sigma0 + int_0^x F for a candidate profile and
/// reports the worst inclusion distance to L(u_x); sigma0 minimizes it.
VerifyReport verify_steady(const Profile& u, const OperatorSpec& op, const PiecewiseConstant& F,
                           const Grid& grid, double tol);

}  // namespace facetflow

#endif  // FACETFLOW_STEADY_HPP
