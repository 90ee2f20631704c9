#include "facetflow/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace facetflow {

double PolyPiece::eval(double x) const {
  double v = 0.0;
  for (std::size_t k = coef.size(); k-- > 0;) v = v * x + coef[k];
  return v;
}

double PolyPiece::deriv(double x) const {
  double v = 0.0;
  for (std::size_t k = coef.size(); k-- > 1;) v = v * x + k * coef[k];
  return v;
}

namespace {
double eval_pieces(const std::vector<PolyPiece>& pieces, double x) {
  for (const auto& p : pieces)
    if (x <= p.b) return p.eval(x);
  return pieces.back().eval(x);
}
}  // namespace

double SteadySolution::eval(double x) const { return eval_pieces(pieces, x); }
double SteadySolution::eval_flux(double x) const { return eval_pieces(flux, x); }

Profile SteadySolution::sample(const Grid& g) const {
  std::vector<double> v(g.n_nodes());
  for (int i = 0; i <= g.n_cells; ++i) v[i] = eval(g.node(i));
  v.front() = 0.0;
  v.back() = 0.0;
  return Profile(std::move(v));
}

SteadySolution solve_constant_force(const OperatorSpec& op, double A) {
  if (op.kind != OperatorKind::TvPlusLinear)
    throw std::invalid_argument("solve_constant_force: operator must be L1 (tv_plus_linear)");
  if (!(A >= 0.0)) throw std::invalid_argument("solve_constant_force: A must be >= 0");

  SteadySolution out;
  if (A <= 2.0) {
    // Stagnation band: the primitive A x fits in a width-2 band, so the
    // zero profile is steady with flux sigma = A (x - 1/2).
    out.pieces = {{0.0, 1.0, {0.0}}};
    out.facets = {{0.0, 1.0, 0.0, FacetKind::Boundary}};
    out.flux = {{0.0, 1.0, {-0.5 * A, A}}};
    return out;
  }

  const double xm = 0.5 - 1.0 / A;  // facet [xm, xp], length 2/A from int F = 2
  const double xp = 0.5 + 1.0 / A;
  // Left arm: u_xx = A, u(0) = 0, u_x(xm) = 0 -> u = A x^2/2 - A xm x.
  const double level = -0.5 * A * xm * xm;
  // Right arm by symmetry: u(x) = u(1-x) = A(1-x)^2/2 - A xm (1-x).
  out.pieces = {
      {0.0, xm, {0.0, -A * xm, 0.5 * A}},
      {xm, xp, {level}},
      {xp, 1.0, {0.5 * A - A * xm, -A + A * xm, 0.5 * A}},
  };
  out.facets = {{xm, xp, level, FacetKind::Min}};
  // Flux sigma = A (x - 1/2) everywhere (continuous, in the band on the facet).
  out.flux = {{0.0, 1.0, {-0.5 * A, A}}};
  return out;
}

double three_facet_c(double alpha) { return 2.0 / (4.0 + alpha) + 0.25; }
double three_facet_e(double alpha) { return 0.5 + 1.0 / (4.0 - alpha); }

PiecewiseConstant f_alpha_slice(double q) {
  PiecewiseConstant out;
  out.xs = {0.0, 0.25, 0.375, 0.625, 0.75, 1.0};
  out.vals = {4.0, 4.0 + q, 4.0 - q, 4.0 + q, 4.0};
  return out;
}

SteadySolution solve_three_facet(const OperatorSpec& op, double alpha) {
  if (op.kind != OperatorKind::TvPlusLinear)
    throw std::invalid_argument("solve_three_facet: operator must be L1 (tv_plus_linear)");
  if (!(alpha > 12.0))
    throw std::invalid_argument(
        "REFUSED_NO_BREAKING: solve_three_facet requires alpha > 12 (the single facet does not "
        "break below the threshold)");

  const double c = three_facet_c(alpha);
  const double e = three_facet_e(alpha);
  const double fp = 4.0 + alpha;  // force on (1/4, 3/8)
  const double fm = 4.0 - alpha;  // force on (3/8, 5/8)

  // Compatibility of the middle arch: int_c^e f_alpha dx must vanish.
  const double compat = (0.375 - c) * fp + (e - 0.375) * fm;
  if (std::abs(compat) > 1e-12)
    throw std::runtime_error("solve_three_facet: compatibility integral not zero");

  // Piece on [0, 1/4]: u_xx = 4, u(0) = 0, u_x(1/4) = 0.
  const double min_level = -0.125;  // 2 x^2 - x at x = 1/4

  // Arch on [c, e]: u_xx = f_alpha with u_x(c) = 0, u(c) = min_level.
  // On [c, 3/8]: u = min_level + fp (x - c)^2 / 2.
  // On [3/8, e]: continue with slope s38 and curvature fm.
  const double s38 = fp * (0.375 - c);
  const double u38 = min_level + 0.5 * fp * (0.375 - c) * (0.375 - c);
  const double max_level = u38 + s38 * (e - 0.375) + 0.5 * fm * (e - 0.375) * (e - 0.375);

  SteadySolution out;
  auto parabola = [](double x0, double u0, double s0, double curv, double a, double b) {
    // u(x) = u0 + s0 (x - x0) + curv (x - x0)^2 / 2, expanded in x.
    PolyPiece p;
    p.a = a;
    p.b = b;
    p.coef = {u0 - s0 * x0 + 0.5 * curv * x0 * x0, s0 - curv * x0, 0.5 * curv};
    return p;
  };

  out.pieces.push_back(parabola(0.25, min_level, 0.0, 4.0, 0.0, 0.25));
  out.pieces.push_back({0.25, c, {min_level}});
  out.pieces.push_back(parabola(c, min_level, 0.0, fp, c, 0.375));
  out.pieces.push_back(parabola(0.375, u38, s38, fm, 0.375, e));
  out.pieces.push_back({e, 1.0 - e, {max_level}});
  // Mirror images for [1-e, 1].
  out.pieces.push_back(parabola(1.0 - 0.375, u38, -s38, fm, 1.0 - e, 1.0 - 0.375));
  out.pieces.push_back(parabola(1.0 - c, min_level, 0.0, fp, 1.0 - 0.375, 1.0 - c));
  out.pieces.push_back({1.0 - c, 0.75, {min_level}});
  out.pieces.push_back(parabola(0.75, min_level, 0.0, 4.0, 0.75, 1.0));

  out.facets = {
      {0.25, c, min_level, FacetKind::Min},
      {e, 1.0 - e, max_level, FacetKind::Max},
      {1.0 - c, 0.75, min_level, FacetKind::Min},
  };

  // Flux: sigma(x) = sigma(0) + int_0^x f_alpha with sigma(1/4) = -1
  // (the left minimum facet is entered with u_x < 0).
  PiecewiseConstant f = f_alpha_slice(alpha);
  double sigma = -1.0 - f.integral(0.0, 0.25);
  std::vector<double> pts = f.xs;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double v = f.vals[i];
    out.flux.push_back({pts[i], pts[i + 1], {sigma - v * pts[i], v}});
    sigma += v * (pts[i + 1] - pts[i]);
  }
  return out;
}

SteadyNumericResult solve_steady_numeric(const OperatorSpec& op, const PiecewiseConstant& F,
                                         const Grid& grid, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_steady_numeric: tol must be > 0");
  // Proximal-point iteration: repeated implicit steps of the flow
  // u_t - d/dx L(u_x) = -F drive u to the minimizer of the steady energy.
  std::vector<double> f_cells = F.negated().cell_samples(grid);

  Profile u = Profile::zeros(grid);
  EdgePattern warm;
  const double tau = 2.0;
  const int max_iters = 400;
  double best_residual = std::numeric_limits<double>::infinity();
  SteadyNumericResult out;

  for (int it = 1; it <= max_iters; ++it) {
    StepProblem p(u, f_cells, tau, op, grid);
    StepResult r = implicit_step(p, std::max(1e-13, 0.01 * tol), &warm);
    double move = sup_distance(r.u, u);
    u = r.u;
    if (move < 1e-15 * std::max(1.0, u.sup_norm()) || it == max_iters) {
      VerifyReport v = verify_steady(u, op, F, grid, tol);
      best_residual = std::min(best_residual, v.violation);
      if (v.violation <= tol) {
        out.u = u;
        out.residual = v.violation;
        out.iterations = it;
        // Exact steady flux from the reconstruction constant.
        out.flux.resize(grid.n_cells);
        for (int k = 0; k < grid.n_cells; ++k)
          out.flux[k] = v.sigma0 + F.integral(0.0, grid.cell_mid(k));
        return out;
      }
      if (it == max_iters)
        throw SolverError("solve_steady_numeric: iteration budget exhausted", best_residual);
    }
  }
  throw SolverError("solve_steady_numeric: iteration budget exhausted", best_residual);
}

VerifyReport verify_steady(const Profile& u, const OperatorSpec& op, const PiecewiseConstant& F,
                           const Grid& grid, double tol) {
  if (u.values.front() != 0.0 || u.values.back() != 0.0)
    throw std::invalid_argument("verify_steady: candidate violates Dirichlet conditions");
  const int n = grid.n_cells;
  const double h = grid.h;

  // sigma(x) = sigma0 + int_0^x F, sampled at edge midpoints. The worst
  // inclusion violation is convex in sigma0 and piecewise linear with unit
  // slopes, so the optimal constant has a closed form: center sigma0
  // between the binding lower and upper interval constraints.
  std::vector<double> base(n);
  std::vector<ClosedInterval> want(n);
  for (int k = 0; k < n; ++k) {
    base[k] = F.integral(0.0, grid.cell_mid(k));
    want[k] = op.eval((u[k + 1] - u[k]) / h);
  }
  double cmax_lo = -std::numeric_limits<double>::infinity();
  double cmin_hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    cmax_lo = std::max(cmax_lo, want[k].lo - base[k]);
    cmin_hi = std::min(cmin_hi, want[k].hi - base[k]);
  }
  VerifyReport out;
  out.sigma0 = 0.5 * (cmax_lo + cmin_hi);
  for (int k = 0; k < n; ++k) {
    double d = want[k].dist(out.sigma0 + base[k]);
    if (d > out.violation) {
      out.violation = d;
      out.location = grid.cell_mid(k);
    }
  }
  out.pass = out.violation <= tol;
  return out;
}

}  // namespace facetflow
