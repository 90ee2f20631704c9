#include "facetflow/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace facetflow {

namespace {

double poly_eval(const std::vector<double>& c, double p) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * p + c[k];
  return v;
}

double poly_deriv(const std::vector<double>& c, double p) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) v = v * p + k * c[k];
  return v;
}

// Antiderivative of the polynomial, zero at p0.
double poly_antideriv(const std::vector<double>& c, double p, double p0) {
  double vp = 0.0, v0 = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    vp = vp * p + c[k] / (k + 1);
    v0 = v0 * p0 + c[k] / (k + 1);
  }
  return vp * p - v0 * p0;
}

}  // namespace

RegularPart::RegularPart(std::vector<double> breaks, std::vector<std::vector<double>> coeffs)
    : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != breaks_.size() + 1)
    throw std::invalid_argument("RegularPart: need one piece more than breakpoints");
  if (!std::is_sorted(breaks_.begin(), breaks_.end()))
    throw std::invalid_argument("RegularPart: breakpoints must be sorted");
  check_monotone();
}

RegularPart RegularPart::identity() { return RegularPart({}, {{0.0, 1.0}}); }

std::size_t RegularPart::piece_index(double p) const {
  return std::upper_bound(breaks_.begin(), breaks_.end(), p) - breaks_.begin();
}

void RegularPart::check_monotone() const {
  // Sample each piece on a bounded window around its range plus check
  // continuity of the table at breakpoints.
  const double big = 64.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    double lo = (i == 0) ? -big : breaks_[i - 1];
    double hi = (i == coeffs_.size() - 1) ? big : breaks_[i];
    for (int s = 0; s <= 32; ++s) {
      double p = lo + (hi - lo) * s / 32.0;
      if (poly_deriv(coeffs_[i], p) < -1e-12)
        throw std::invalid_argument("RegularPart: table is not nondecreasing");
    }
  }
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    double left = poly_eval(coeffs_[i], breaks_[i]);
    double right = poly_eval(coeffs_[i + 1], breaks_[i]);
    if (std::abs(left - right) > 1e-12 * std::max(1.0, std::abs(left)))
      throw std::invalid_argument("RegularPart: table is discontinuous at a breakpoint");
  }
}

double RegularPart::value(double p) const {
  if (empty()) return 0.0;
  return poly_eval(coeffs_[piece_index(p)], p);
}

double RegularPart::deriv(double p) const {
  if (empty()) return 0.0;
  return poly_deriv(coeffs_[piece_index(p)], p);
}

double RegularPart::primitive(double p) const {
  if (empty()) return 0.0;
  // Integrate piecewise from 0 to p.
  double sign = (p >= 0.0) ? 1.0 : -1.0;
  double a = std::min(0.0, p), b = std::max(0.0, p);
  double acc = 0.0;
  std::size_t ia = piece_index(a), ib = piece_index(b);
  if (ia == ib) return sign * poly_antideriv(coeffs_[ia], b, a);
  acc += poly_antideriv(coeffs_[ia], breaks_[ia], a);
  for (std::size_t i = ia + 1; i < ib; ++i)
    acc += poly_antideriv(coeffs_[i], breaks_[i], breaks_[i - 1]);
  acc += poly_antideriv(coeffs_[ib], b, breaks_[ib - 1]);
  return sign * acc;
}

OperatorSpec OperatorSpec::tv_only() { return {OperatorKind::TvOnly, RegularPart()}; }

OperatorSpec OperatorSpec::tv_plus_linear() {
  return {OperatorKind::TvPlusLinear, RegularPart::identity()};
}

OperatorSpec OperatorSpec::tv_plus_regular(RegularPart part) {
  return {OperatorKind::TvPlusRegular, std::move(part)};
}

double OperatorSpec::regular_value(double p) const { return regular.value(p); }
double OperatorSpec::regular_deriv(double p) const { return regular.deriv(p); }

double OperatorSpec::primitive(double p) const { return std::abs(p) + regular.primitive(p); }

ClosedInterval OperatorSpec::eval(double p) const {
  if (!std::isfinite(p)) throw std::invalid_argument("eval_operator: p must be finite");
  if (p == 0.0) {
    double c = center();
    return {c - 1.0, c + 1.0};
  }
  double v = regular_value(p) + (p > 0.0 ? 1.0 : -1.0);
  return {v, v};
}

std::string OperatorSpec::kind_name() const {
  switch (kind) {
    case OperatorKind::TvOnly: return "tv_only";
    case OperatorKind::TvPlusLinear: return "tv_plus_linear";
    case OperatorKind::TvPlusRegular: return "tv_plus_regular";
  }
  return "?";
}

Profile::Profile(std::vector<double> v) : values(std::move(v)) {
  if (values.size() < 2) throw std::invalid_argument("Profile: too few nodes");
  if (values.front() != 0.0 || values.back() != 0.0)
    throw std::invalid_argument("Profile: Dirichlet ends must be exactly 0");
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("Profile: non-finite value");
}

Profile Profile::zeros(const Grid& g) {
  Profile p;
  p.values.assign(g.n_nodes(), 0.0);
  return p;
}

double Profile::sup_norm() const {
  double m = 0.0;
  for (double x : values) m = std::max(m, std::abs(x));
  return m;
}

double sup_distance(const Profile& a, const Profile& b) {
  if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double l2_distance(const Profile& a, const Profile& b, double h) {
  if (a.size() != b.size()) throw std::invalid_argument("l2_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += h * d * d;
  }
  return std::sqrt(s);
}

double PiecewiseConstant::eval(double x) const {
  // Right-continuous pieces; x = 1 belongs to the last piece.
  if (x >= xs.back()) return vals.back();
  std::size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
  if (i == 0) return vals.front();
  return vals[i - 1];
}

double PiecewiseConstant::integral(double a, double b) const {
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    double lo = std::max(a, xs[i]);
    double hi = std::min(b, xs[i + 1]);
    if (hi > lo) acc += vals[i] * (hi - lo);
  }
  return sign * acc;
}

double PiecewiseConstant::sup_abs() const {
  double m = 0.0;
  for (double v : vals) m = std::max(m, std::abs(v));
  return m;
}

PiecewiseConstant PiecewiseConstant::negated() const {
  PiecewiseConstant out = *this;
  for (double& v : out.vals) v = -v;
  return out;
}

std::vector<double> PiecewiseConstant::cell_samples(const Grid& g) const {
  std::vector<double> out(g.n_cells);
  for (int k = 0; k < g.n_cells; ++k) out[k] = eval(g.cell_mid(k));
  return out;
}

std::vector<double> PiecewiseConstant::interior_breakpoints(double a, double b) const {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    if (xs[i] > a && xs[i] < b) out.push_back(xs[i]);
  return out;
}

void ForceField::validate() const {
  auto check_terms = [](const std::vector<ForceTerm>& terms, const char* what) {
    for (const auto& t : terms) {
      if (!(t.a >= 0.0 && t.b <= 1.0 && t.a < t.b))
        throw std::invalid_argument(std::string("ForceField: bad ") + what + " interval [" +
                                    std::to_string(t.a) + ", " + std::to_string(t.b) + "]");
      if (!std::isfinite(t.amplitude))
        throw std::invalid_argument("ForceField: non-finite amplitude");
    }
  };
  check_terms(base, "base");
  check_terms(ramp, "ramp");
  if (law == TimeLaw::ClippedRamp && !(cap >= 0.0))
    throw std::invalid_argument("ForceField: ramp cap must be >= 0");
  if (global_sign != 1.0 && global_sign != -1.0)
    throw std::invalid_argument("ForceField: global_sign must be +1 or -1");
}

double ForceField::time_factor(double t) const {
  switch (law) {
    case TimeLaw::Constant: return 1.0;
    case TimeLaw::ClippedRamp: return std::min(t, cap);
  }
  return 0.0;
}

namespace {
// Indicator with right-continuity; x = 1 counts when b = 1.
double chi(const ForceTerm& term, double x) {
  if (x >= term.a && x < term.b) return 1.0;
  if (x == 1.0 && term.b == 1.0) return 1.0;
  return 0.0;
}
}  // namespace

double ForceField::eval(double x, double t) const {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("eval_force: x outside [0,1]");
  if (t < 0.0) throw std::invalid_argument("eval_force: t must be >= 0");
  double s = 0.0;
  for (const auto& term : base) s += term.amplitude * chi(term, x);
  double tf = time_factor(t);
  for (const auto& term : ramp) s += tf * term.amplitude * chi(term, x);
  return global_sign * s;
}

std::vector<double> ForceField::breakpoints() const {
  std::set<double> pts = {0.0, 1.0};
  for (const auto& t : base) {
    pts.insert(t.a);
    pts.insert(t.b);
  }
  for (const auto& t : ramp) {
    pts.insert(t.a);
    pts.insert(t.b);
  }
  return {pts.begin(), pts.end()};
}

PiecewiseConstant ForceField::slice(double t) const {
  PiecewiseConstant out;
  out.xs = breakpoints();
  out.vals.resize(out.xs.size() - 1);
  for (std::size_t i = 0; i + 1 < out.xs.size(); ++i)
    out.vals[i] = eval(0.5 * (out.xs[i] + out.xs[i + 1]), t);
  return out;
}

PiecewiseConstant ForceField::ramp_slice() const {
  ForceField ramp_only;
  ramp_only.base = ramp;
  ramp_only.global_sign = global_sign;
  return ramp_only.slice(0.0);
}

double ForceField::integral(double a, double b, double t) const { return slice(t).integral(a, b); }

double ForceField::sup_abs(double t) const { return slice(t).sup_abs(); }

double ForceField::primitive_range(double t) const {
  PiecewiseConstant s = slice(t);
  double p = 0.0, lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i + 1 < s.xs.size(); ++i) {
    p += s.vals[i] * (s.xs[i + 1] - s.xs[i]);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return hi - lo;
}

}  // namespace facetflow
