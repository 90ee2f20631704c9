#ifndef FACETFLOW_MODEL_HPP
#define FACETFLOW_MODEL_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace facetflow {

/// Closed interval of admissible flux values.
struct ClosedInterval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double s) const { return s >= lo && s <= hi; }

  /// Distance from s to the interval (0 if inside).
  double dist(double s) const {
    if (s < lo) return lo - s;
    if (s > hi) return s - hi;
    return 0.0;
  }
};

/// Monotone piecewise-polynomial regular part L_r of the operator.
/// Pieces are polynomials in p; piece i covers (breaks[i-1], breaks[i]].
/// The table must be nondecreasing (L_r' >= 0); this is checked on
/// construction by sampling each piece.
class RegularPart {
 public:
  RegularPart() = default;
  RegularPart(std::vector<double> breaks, std::vector<std::vector<double>> coeffs);

  static RegularPart identity();  // L_r(p) = p

  bool empty() const { return coeffs_.empty(); }
  double value(double p) const;
  double deriv(double p) const;
  /// Primitive W_r(p) = \int_0^p L_r(q) dq.
  double primitive(double p) const;

 private:
  std::size_t piece_index(double p) const;
  void check_monotone() const;

  std::vector<double> breaks_;               // sorted interior breakpoints
  std::vector<std::vector<double>> coeffs_;  // coeffs_[i][k] * p^k
};

enum class OperatorKind { TvOnly, TvPlusLinear, TvPlusRegular };

/// The monotone graph L(p) = L_r(p) + sgn(p): single-valued away from
/// p = 0, the closed interval [L_r(0)-1, L_r(0)+1] at p = 0.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::TvOnly;
  RegularPart regular;

  static OperatorSpec tv_only();
  static OperatorSpec tv_plus_linear();
  static OperatorSpec tv_plus_regular(RegularPart part);

  double regular_value(double p) const;
  double regular_deriv(double p) const;
  /// Midpoint of the jump interval, L_r(0).
  double center() const { return regular_value(0.0); }
  /// W(p) = |p| + W_r(p), the convex primitive of the graph.
  double primitive(double p) const;
  /// eval_operator: admissible flux values at slope p.
  ClosedInterval eval(double p) const;

  std::string kind_name() const;
};

/// Uniform partition of (0,1) with Dirichlet ends.
struct Grid {
  int n_cells = 0;
  double h = 0.0;

  explicit Grid(int n) : n_cells(n), h(1.0 / n) {
    if (n < 4) throw std::invalid_argument("Grid: n_cells must be >= 4");
  }
  double node(int i) const { return i * h; }
  double cell_mid(int k) const { return (k + 0.5) * h; }
  int n_nodes() const { return n_cells + 1; }
};

/// Discrete solution values on the grid nodes; ends pinned to 0.
struct Profile {
  std::vector<double> values;

  Profile() = default;
  explicit Profile(std::vector<double> v);
  static Profile zeros(const Grid& g);

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  double sup_norm() const;
  double slope(std::size_t k, double h) const { return (values[k + 1] - values[k]) / h; }
};

double sup_distance(const Profile& a, const Profile& b);
/// Discrete L2 distance sqrt(sum h (a_i-b_i)^2).
double l2_distance(const Profile& a, const Profile& b, double h);

/// Exact piecewise-constant function of x on [0,1]: value vals[i] on
/// [xs[i], xs[i+1]) (last piece closed at 1).
struct PiecewiseConstant {
  std::vector<double> xs;    // breakpoints, xs.front()=0, xs.back()=1
  std::vector<double> vals;  // one per piece

  double eval(double x) const;
  /// Exact integral over [a,b] from the term list; no quadrature.
  double integral(double a, double b) const;
  double sup_abs() const;
  PiecewiseConstant negated() const;
  /// Per-cell values sampled at cell midpoints.
  std::vector<double> cell_samples(const Grid& g) const;
  /// Breakpoints strictly inside (a,b).
  std::vector<double> interior_breakpoints(double a, double b) const;
};

struct ForceTerm {
  double a = 0.0;
  double b = 0.0;
  double amplitude = 0.0;
};

enum class TimeLaw { Constant, ClippedRamp };

/// Piecewise-constant-in-space force with a time modulation law on the
/// ramp terms. Indicator convention: chi_[a,b] is 1 on [a,b) plus the
/// point x = 1 when b = 1.
struct ForceField {
  std::vector<ForceTerm> base;
  std::vector<ForceTerm> ramp;
  TimeLaw law = TimeLaw::Constant;
  double cap = 0.0;          // only meaningful for ClippedRamp
  double global_sign = 1.0;  // +1 or -1

  void validate() const;
  double time_factor(double t) const;
  /// eval_force at a point.
  double eval(double x, double t) const;
  /// Spatial slice at time t, exact piecewise-constant form.
  PiecewiseConstant slice(double t) const;
  /// Exact integral over [a,b] at time t.
  double integral(double a, double b, double t) const;
  /// sup over x of |f(x,t)|.
  double sup_abs(double t) const;
  /// Range width of the primitive x -> int_0^x f(.,t): the band-condition
  /// quantity. The zero profile is steady iff this is <= 2.
  double primitive_range(double t) const;
  /// Slice of the ramp part alone (time factor 1, global sign applied).
  PiecewiseConstant ramp_slice() const;

  std::vector<double> breakpoints() const;
};

constexpr double kDefaultSign = 1.0;

}  // namespace facetflow

#endif  // FACETFLOW_MODEL_HPP
