#include "facetflow/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace facetflow {

StepProblem::StepProblem(Profile g_, std::vector<double> f_, double tau_, OperatorSpec op_,
                         Grid grid_)
    : g(std::move(g_)), f_cells(std::move(f_)), tau(tau_), op(std::move(op_)), grid(grid_) {
  if (!(tau > 0.0)) throw std::invalid_argument("StepProblem: tau must be > 0");
  if (static_cast<int>(g.size()) != grid.n_nodes())
    throw std::invalid_argument("StepProblem: profile/grid size mismatch");
  if (static_cast<int>(f_cells.size()) != grid.n_cells)
    throw std::invalid_argument("StepProblem: force/grid size mismatch");
}

double StepProblem::scale() const {
  double fmax = 0.0;
  for (double v : f_cells) fmax = std::max(fmax, std::abs(v));
  return std::max(1.0, g.sup_norm() / tau + fmax);
}

double default_step_tol(const StepProblem& p) { return 1e-10 * p.scale(); }

double step_objective(const StepProblem& p, const Profile& u) {
  const int n = p.grid.n_cells;
  const double h = p.grid.h;
  double obj = 0.0;
  for (int i = 1; i < n; ++i) {
    double d = u[i] - p.g[i];
    obj += h * d * d / (2.0 * p.tau) - h * p.node_force(i) * u[i];
  }
  for (int k = 0; k < n; ++k) obj += h * p.op.primitive((u[k + 1] - u[k]) / h);
  return obj;
}

namespace {

// Thomas algorithm for a tridiagonal system; overwrites inputs.
void solve_tridiag(std::vector<double>& dl, std::vector<double>& dg, std::vector<double>& du,
                   std::vector<double>& rhs) {
  const std::size_t m = dg.size();
  for (std::size_t i = 1; i < m; ++i) {
    double w = dl[i] / dg[i - 1];
    dg[i] -= w * du[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[m - 1] /= dg[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] = (rhs[i] - du[i] * rhs[i + 1]) / dg[i];
}

struct Group {
  int start = 0;  // first node
  int end = 0;    // last node
  bool pinned = false;
  int unknown_index = -1;  // position among unknown groups, -1 if pinned
};

std::size_t pattern_hash(const EdgePattern& p) {
  std::size_t hsh = 1469598103934665603ull;
  for (auto v : p) {
    hsh ^= static_cast<std::size_t>(v + 2);
    hsh *= 1099511628211ull;
  }
  return hsh;
}

class StepSolver {
 public:
  StepSolver(const StepProblem& p, double tol) : p_(p), tol_(tol), n_(p.grid.n_cells) {
    h_ = p.grid.h;
    w_.assign(n_ + 1, 0.0);
    for (int i = 1; i < n_; ++i) w_[i] = p.g[i] + p.tau * p.node_force(i);
    linear_op_ = (p.op.kind != OperatorKind::TvPlusRegular);
    jump_lo_ = p.op.center() - 1.0;
    jump_hi_ = p.op.center() + 1.0;
  }

  StepResult solve(EdgePattern* warm) {
    EdgePattern pattern;
    if (warm && static_cast<int>(warm->size()) == n_) {
      pattern = *warm;
    } else {
      pattern = pattern_from_profile(p_.g);
    }

    const int max_iters = 60 + 4 * n_;
    double best_residual = std::numeric_limits<double>::infinity();
    bool worst_only = false;
    std::unordered_set<std::size_t> seen;

    for (int iter = 0; iter < max_iters; ++iter) {
      if (!seen.insert(pattern_hash(pattern)).second) worst_only = true;

      build_groups(pattern);
      solve_groups(pattern);
      compute_fluxes(pattern);

      double worst = 0.0;
      int worst_edge = -1;
      std::int8_t worst_state = 0;
      std::vector<std::pair<int, std::int8_t>> flips;
      // Tolerances: fused-flux violations are measured against the jump
      // interval, sign violations against the slope scale.
      const double eps_f = std::max(1e-13 * flux_scale(), 0.25 * tol_);
      const double eps_d = 1e-12;

      for (int k = 0; k < n_; ++k) {
        double d = (u_[k + 1] - u_[k]) / h_;
        if (pattern[k] == 0) {
          double viol = std::max(flux_[k] - jump_hi_, jump_lo_ - flux_[k]);
          if (viol > eps_f) {
            std::int8_t s = (flux_[k] > jump_hi_) ? +1 : -1;
            flips.push_back({k, s});
            if (viol > worst) {
              worst = viol;
              worst_edge = k;
              worst_state = s;
            }
          }
        } else {
          double sd = pattern[k] * d;
          if (sd < eps_d) {
            // Wrong-signed or vanishing slope: the edge belongs to a facet.
            double viol = (sd < 0.0) ? -sd : eps_d;
            flips.push_back({k, 0});
            if (viol >= worst) {
              worst = viol;
              worst_edge = k;
              worst_state = 0;
            }
          }
        }
      }

      if (flips.empty()) {
        StepResult out = make_result();
        if (out.cert.residual <= tol_) {
          if (warm) *warm = pattern;
          return out;
        }
        best_residual = std::min(best_residual, out.cert.residual);
        // No KKT violation above threshold yet residual over tol: the
        // thresholds are the limiting factor; give up honestly.
        throw SolverError("implicit_step: converged pattern exceeds tolerance", best_residual);
      }

      if (worst_only) {
        pattern[worst_edge] = worst_state;
      } else {
        for (auto [k, s] : flips) pattern[k] = s;
      }
    }
    throw SolverError("implicit_step: iteration budget exhausted", best_residual);
  }

 private:
  EdgePattern pattern_from_profile(const Profile& u) const {
    EdgePattern pat(n_, 0);
    for (int k = 0; k < n_; ++k) {
      double d = (u[k + 1] - u[k]) / h_;
      if (d > 1e-12)
        pat[k] = +1;
      else if (d < -1e-12)
        pat[k] = -1;
    }
    return pat;
  }

  double flux_scale() const {
    double fmax = 0.0;
    for (double v : p_.f_cells) fmax = std::max(fmax, std::abs(v));
    return std::max(1.0, fmax + p_.g.sup_norm() / p_.tau);
  }

  void build_groups(const EdgePattern& pattern) {
    groups_.clear();
    int start = 0;
    for (int k = 0; k <= n_; ++k) {
      bool last = (k == n_);
      if (last || pattern[k] != 0) {
        Group g;
        g.start = start;
        g.end = k;  // nodes start..k joined by fused edges start..k-1
        g.pinned = (g.start == 0 || g.end == n_);
        groups_.push_back(g);
        start = k + 1;
      }
    }
    unknowns_ = 0;
    for (auto& g : groups_)
      if (!g.pinned) g.unknown_index = unknowns_++;
  }

  double group_value(std::size_t gi) const {
    return groups_[gi].pinned ? 0.0 : v_[groups_[gi].unknown_index];
  }

  // Stationarity residual of unknown groups at the current values.
  void group_residual(const EdgePattern& pattern, std::vector<double>& r) const {
    r.assign(unknowns_, 0.0);
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const Group& g = groups_[gi];
      if (g.pinned) continue;
      double val = v_[g.unknown_index];
      double acc = 0.0;
      for (int i = g.start; i <= g.end; ++i) acc += (h_ / p_.tau) * (val - w_[i]);
      // Left edge g.start-1 and right edge g.end always exist for an
      // unpinned group.
      int kl = g.start - 1, kr = g.end;
      double dl = (val - group_value(gi - 1)) / h_;
      double dr = (group_value(gi + 1) - val) / h_;
      acc += p_.op.regular_value(dl) + pattern[kl];
      acc -= p_.op.regular_value(dr) + pattern[kr];
      r[g.unknown_index] = acc;
    }
  }

  void solve_groups(const EdgePattern& pattern) {
    v_.assign(unknowns_, 0.0);
    if (unknowns_ > 0) {
      // Start from the group means of w; exact after one iteration for
      // linear operators.
      for (const auto& g : groups_) {
        if (g.pinned) continue;
        double s = 0.0;
        for (int i = g.start; i <= g.end; ++i) s += w_[i];
        v_[g.unknown_index] = s / (g.end - g.start + 1);
      }
      std::vector<double> r, dl, dg, du, step;
      const int max_newton = linear_op_ ? 1 : 60;
      double rtol = 1e-13 * std::max(1.0, (h_ / p_.tau) * (1.0 + p_.g.sup_norm())) +
                    1e-13 * flux_scale();
      for (int it = 0; it < max_newton; ++it) {
        group_residual(pattern, r);
        double rn = 0.0;
        for (double x : r) rn = std::max(rn, std::abs(x));
        if (!linear_op_ && rn <= rtol && it > 0) break;

        dl.assign(unknowns_, 0.0);
        dg.assign(unknowns_, 0.0);
        du.assign(unknowns_, 0.0);
        for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
          const Group& g = groups_[gi];
          if (g.pinned) continue;
          int j = g.unknown_index;
          double val = v_[j];
          double dlp = p_.op.regular_deriv((val - group_value(gi - 1)) / h_);
          double drp = p_.op.regular_deriv((group_value(gi + 1) - val) / h_);
          dg[j] = (h_ / p_.tau) * (g.end - g.start + 1) + (dlp + drp) / h_;
          if (!groups_[gi - 1].pinned) dl[j] = -dlp / h_;
          if (!groups_[gi + 1].pinned) du[j] = -drp / h_;
        }
        step = r;
        solve_tridiag(dl, dg, du, step);
        if (linear_op_) {
          for (int j = 0; j < unknowns_; ++j) v_[j] -= step[j];
          break;
        }
        // Damped update for nonlinear regular parts.
        double t = 1.0;
        std::vector<double> vtry(unknowns_), rtry;
        for (int ls = 0; ls < 40; ++ls) {
          for (int j = 0; j < unknowns_; ++j) vtry[j] = v_[j] - t * step[j];
          std::swap(v_, vtry);
          group_residual(pattern, rtry);
          double rn2 = 0.0;
          for (double x : rtry) rn2 = std::max(rn2, std::abs(x));
          if (rn2 <= (1.0 - 0.25 * t) * rn || rn2 <= rtol) break;
          std::swap(v_, vtry);
          t *= 0.5;
        }
      }
    }
    u_.assign(n_ + 1, 0.0);
    for (const auto& g : groups_) {
      double val = g.pinned ? 0.0 : v_[g.unknown_index];
      for (int i = g.start; i <= g.end; ++i) u_[i] = val;
    }
    u_[0] = 0.0;
    u_[n_] = 0.0;
  }

  void compute_fluxes(const EdgePattern& pattern) {
    flux_.assign(n_, 0.0);
    for (int k = 0; k < n_; ++k) {
      if (pattern[k] != 0)
        flux_[k] = p_.op.regular_value((u_[k + 1] - u_[k]) / h_) + pattern[k];
    }
    // Fused runs: telescope the nodal balance through each group.
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const Group& g = groups_[gi];
      if (g.start >= g.end) continue;  // no internal edges
      if (g.start > 0) {
        double s = flux_[g.start - 1];
        for (int k = g.start; k < g.end; ++k) {
          s += (h_ / p_.tau) * (u_[k] - w_[k]);
          flux_[k] = s;
        }
      } else if (g.end < n_) {
        double s = flux_[g.end];
        for (int k = g.end; k-- > 0;) {
          s -= (h_ / p_.tau) * (u_[k + 1] - w_[k + 1]);
          flux_[k] = s;
        }
      } else {
        // Whole domain fused: one free constant, centered in the band.
        std::vector<double> basev(n_, 0.0);
        double s = 0.0;
        for (int k = 1; k < n_; ++k) {
          s += (h_ / p_.tau) * (u_[k] - w_[k]);
          basev[k] = s;
        }
        double cmax_lo = -std::numeric_limits<double>::infinity();
        double cmin_hi = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n_; ++k) {
          cmax_lo = std::max(cmax_lo, jump_lo_ - basev[k]);
          cmin_hi = std::min(cmin_hi, jump_hi_ - basev[k]);
        }
        double c = 0.5 * (cmax_lo + cmin_hi);
        for (int k = 0; k < n_; ++k) flux_[k] = c + basev[k];
      }
    }
  }

  StepResult make_result() const {
    StepResult out;
    out.u = Profile(u_);
    out.cert.flux = flux_;
    double res = 0.0, gap = 0.0;
    for (int k = 0; k < n_; ++k) {
      double d = (u_[k + 1] - u_[k]) / h_;
      double dist = p_.op.eval(d).dist(flux_[k]);
      res = std::max(res, dist);
      gap += dist * (std::abs(u_[k + 1] - u_[k]) + h_);
    }
    out.cert.residual = res;
    out.cert.gap_estimate = gap;
    return out;
  }

  const StepProblem& p_;
  double tol_;
  int n_;
  double h_ = 0.0;
  bool linear_op_ = true;
  double jump_lo_ = -1.0, jump_hi_ = 1.0;
  std::vector<double> w_;
  std::vector<Group> groups_;
  int unknowns_ = 0;
  std::vector<double> v_;
  std::vector<double> u_;
  std::vector<double> flux_;
};

}  // namespace

StepResult implicit_step(const StepProblem& p, double tol, EdgePattern* warm) {
  if (!(tol > 0.0)) throw std::invalid_argument("implicit_step: tol must be > 0");
  StepSolver solver(p, tol);
  return solver.solve(warm);
}

namespace {

// Oracle-owned copy of the discrete objective; kept separate from
// step_objective on purpose so the oracle does not ride on library code
// beyond the operator primitive itself.
double oracle_objective(const StepProblem& p, const std::vector<double>& interior) {
  const int n = p.grid.n_cells;
  const double h = p.grid.h;
  auto at = [&](int i) -> double {
    if (i <= 0 || i >= n) return 0.0;
    return interior[i - 1];
  };
  double obj = 0.0;
  for (int i = 1; i < n; ++i) {
    double d = at(i) - p.g[i];
    obj += h * d * d / (2.0 * p.tau);
    obj -= h * 0.5 * (p.f_cells[i - 1] + p.f_cells[i]) * at(i);
  }
  for (int k = 0; k < n; ++k) obj += h * p.op.primitive((at(k + 1) - at(k)) / h);
  return obj;
}

// Exact-ish 1D minimization of a convex function by ternary search.
template <typename F>
double ternary_min(F&& f, double lo, double hi, int iters = 160) {
  for (int i = 0; i < iters; ++i) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (f(m1) <= f(m2))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Profile brute_force_step_oracle(const StepProblem& p, double resolution) {
  const int n = p.grid.n_cells;
  if (n > 8) throw std::invalid_argument("brute_force_step_oracle: refused, n_cells > 8");
  if (!(resolution > 0.0))
    throw std::invalid_argument("brute_force_step_oracle: resolution must be > 0");
  const int m = n - 1;

  double fmax = 0.0;
  for (double v : p.f_cells) fmax = std::max(fmax, std::abs(v));
  const double bound = p.g.sup_norm() + p.tau * fmax + 1e-9;

  // Lattice sweep: a-priori bound on the minimizer keeps the box small.
  int pts_per_dim = m <= 3 ? 15 : (m == 4 ? 13 : (m == 5 ? 9 : (m == 6 ? 7 : 5)));
  std::vector<double> best(m, 0.0), cand(m, 0.0);
  double best_obj = oracle_objective(p, best);
  std::vector<int> idx(m, 0);
  while (true) {
    for (int i = 0; i < m; ++i)
      cand[i] = -bound + 2.0 * bound * idx[i] / (pts_per_dim - 1);
    double obj = oracle_objective(p, cand);
    if (obj < best_obj) {
      best_obj = obj;
      best = cand;
    }
    int i = 0;
    for (; i < m; ++i) {
      if (++idx[i] < pts_per_dim) break;
      idx[i] = 0;
    }
    if (i == m) break;
  }

  // Coordinate descent plus block moves over runs of (near) equal values;
  // single-coordinate descent alone can stall on fused configurations.
  const double span = bound + 1.0;
  for (int sweep = 0; sweep < 400; ++sweep) {
    double before = best_obj;
    for (int i = 0; i < m; ++i) {
      double x = ternary_min(
          [&](double v) {
            cand = best;
            cand[i] = v;
            return oracle_objective(p, cand);
          },
          -span, span);
      cand = best;
      cand[i] = x;
      double obj = oracle_objective(p, cand);
      if (obj < best_obj) {
        best_obj = obj;
        best = cand;
      }
    }
    int run_start = 0;
    for (int i = 1; i <= m; ++i) {
      if (i == m || std::abs(best[i] - best[run_start]) > std::max(resolution, 1e-7)) {
        if (i - run_start >= 2) {
          int a = run_start, b = i;
          double d = ternary_min(
              [&](double delta) {
                cand = best;
                for (int j = a; j < b; ++j) cand[j] += delta;
                return oracle_objective(p, cand);
              },
              -span, span);
          cand = best;
          for (int j = a; j < b; ++j) cand[j] += d;
          double obj = oracle_objective(p, cand);
          if (obj < best_obj) {
            best_obj = obj;
            best = cand;
          }
        }
        run_start = i;
      }
    }
    if (before - best_obj < 1e-16 * std::max(1.0, std::abs(best_obj))) break;
  }

  std::vector<double> values(n + 1, 0.0);
  for (int i = 0; i < m; ++i) values[i + 1] = best[i];
  return Profile(values);
}

double inclusion_residual(const Profile& u, const std::vector<double>& flux,
                          const StepProblem& p) {
  const int n = p.grid.n_cells;
  const double h = p.grid.h;
  if (static_cast<int>(flux.size()) != n)
    throw std::invalid_argument("MALFORMED_CERTIFICATE: flux size mismatch");
  const double balance_tol = 1e-7 * p.scale();
  for (int i = 1; i < n; ++i) {
    double lhs = (u[i] - p.g[i]) / p.tau - (flux[i] - flux[i - 1]) / h - p.node_force(i);
    if (std::abs(lhs) > balance_tol)
      throw std::invalid_argument("MALFORMED_CERTIFICATE: discrete balance violated at node " +
                                  std::to_string(i));
  }
  double res = 0.0;
  for (int k = 0; k < n; ++k)
    res = std::max(res, p.op.eval((u[k + 1] - u[k]) / h).dist(flux[k]));
  return res;
}

}  // namespace facetflow
