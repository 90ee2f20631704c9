#include "facetflow/facets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace facetflow {

const char* facet_kind_name(FacetKind k) {
  switch (k) {
    case FacetKind::Min: return "MIN";
    case FacetKind::Max: return "MAX";
    case FacetKind::InflectionFlat: return "INFLECTION_FLAT";
    case FacetKind::Boundary: return "BOUNDARY";
  }
  return "?";
}

int FacetSet::count(FacetKind k) const {
  int c = 0;
  for (const auto& f : facets)
    if (f.kind == k) ++c;
  return c;
}

std::vector<Facet> FacetSet::extrema() const {
  std::vector<Facet> out;
  for (const auto& f : facets)
    if (f.kind == FacetKind::Min || f.kind == FacetKind::Max) out.push_back(f);
  return out;
}

FacetSet detect_facets(const std::vector<double>& values, const Grid& grid, double slope_tol,
                       double min_length) {
  if (!(slope_tol > 0.0)) throw std::invalid_argument("detect_facets: slope_tol must be > 0");
  if (min_length < 2.0 * grid.h)
    throw std::invalid_argument("detect_facets: min_length must be >= 2h");
  if (static_cast<int>(values.size()) != grid.n_nodes())
    throw std::invalid_argument("detect_facets: size mismatch");

  const int n = grid.n_cells;
  const double h = grid.h;
  FacetSet out;
  out.slope_tol = slope_tol;
  out.min_length = min_length;

  int k = 0;
  while (k < n) {
    double d = (values[k + 1] - values[k]) / h;
    if (std::abs(d) > slope_tol) {
      ++k;
      continue;
    }
    int start = k;
    while (k < n && std::abs((values[k + 1] - values[k]) / h) <= slope_tol) ++k;
    int end = k;  // run covers edges start..end-1, nodes start..end
    double length = (end - start) * h;
    if (length + 1e-12 * h < min_length) continue;

    Facet f;
    f.left = grid.node(start);
    f.right = grid.node(end);
    double level = 0.0;
    for (int i = start; i <= end; ++i) level += values[i];
    f.level = level / (end - start + 1);

    if (start == 0 || end == n) {
      f.kind = FacetKind::Boundary;
    } else {
      double din = (values[start] - values[start - 1]) / h;
      double dout = (values[end + 1] - values[end]) / h;
      if (din < 0.0 && dout > 0.0)
        f.kind = FacetKind::Min;
      else if (din > 0.0 && dout < 0.0)
        f.kind = FacetKind::Max;
      else
        f.kind = FacetKind::InflectionFlat;
    }
    out.facets.push_back(f);
  }
  return out;
}

FacetSet detect_facets(const Profile& u, const Grid& grid, double slope_tol, double min_length) {
  return detect_facets(u.values, grid, slope_tol, min_length);
}

double default_slope_tol(const Grid& grid) { return grid.h; }
double default_min_length(const Grid& grid) { return 4.0 * grid.h; }

CreationBound creation_bound_check(const Facet& facet, double f_inf, double ut_inf,
                                   double grid_slack, double ut_l2) {
  if (facet.kind != FacetKind::Min && facet.kind != FacetKind::Max)
    throw std::invalid_argument("creation_bound_check: refused, facet is not an extremum");
  if (!(f_inf + ut_inf > 0.0))
    throw std::invalid_argument("creation_bound_check: need f_inf + ut_inf > 0");
  CreationBound out;
  out.length = facet.length();
  out.linf_bound = 2.0 / (f_inf + ut_inf);
  if (ut_l2 >= 0.0 && f_inf + ut_l2 > 0.0) {
    double b = 2.0 / (f_inf + ut_l2);
    out.l2_bound = b * b;
  }
  out.pass = out.length >= out.linf_bound - grid_slack;
  return out;
}

double facet_flux_balance(const Facet& facet, const PiecewiseConstant& F, double expected_jump) {
  if (facet.left < 0.0 || facet.right > 1.0 || facet.left >= facet.right)
    throw std::invalid_argument("facet_flux_balance: facet interval outside [0,1]");
  return std::abs(F.integral(facet.left, facet.right) - expected_jump);
}

StagnationConditions stagnation_conditions_check(const ForceField& force, double xi_minus,
                                                 double xi_plus,
                                                 const std::vector<double>& t_samples) {
  if (!(0.0 < xi_minus && xi_minus < xi_plus && xi_plus < 1.0))
    throw std::invalid_argument("stagnation_conditions_check: need 0 < xi- < xi+ < 1");
  StagnationConditions out;
  out.support_ok = true;
  out.mean_ok = true;
  out.interior_ok = true;
  out.band_ok = true;
  const double eps = 1e-12;

  PiecewiseConstant f0 = force.slice(0.0);

  for (double t : t_samples) {
    PiecewiseConstant ft = force.slice(t);

    // supp f(t) - f(0) inside [xi-, xi+]: the slices share breakpoints.
    for (std::size_t i = 0; i + 1 < ft.xs.size(); ++i) {
      double diff = ft.vals[i] - f0.vals[i];
      if (std::abs(diff) > eps &&
          !(ft.xs[i] >= xi_minus - eps && ft.xs[i + 1] <= xi_plus + eps))
        out.support_ok = false;
    }

    double mean = ft.integral(xi_minus, xi_plus);
    out.worst_mean = std::max(out.worst_mean, std::abs(mean - 2.0));
    if (std::abs(mean - 2.0) > eps) out.mean_ok = false;

    // Third condition: |int_a^b f| < 2 for xi- < a < b < xi+. For
    // piecewise-constant f the extremal subintervals end at breakpoints;
    // pairs touching xi- or xi+ are limits of interior pairs, so equality
    // there is allowed (the stated inequality is over the open set).
    std::vector<double> verts = ft.interior_breakpoints(xi_minus, xi_plus);
    verts.insert(verts.begin(), xi_minus);
    verts.push_back(xi_plus);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      for (std::size_t j = i + 1; j < verts.size(); ++j) {
        if (i == 0 && j == verts.size() - 1) continue;  // the full interval is condition two
        double v = std::abs(ft.integral(verts[i], verts[j]));
        out.worst_interior = std::max(out.worst_interior, v);
        bool interior_pair = (i > 0 && j < verts.size() - 1);
        if (v > 2.0 + eps || (interior_pair && v >= 2.0 - eps)) out.interior_ok = false;
      }
    }

    double width = force.primitive_range(t);
    out.worst_band = std::max(out.worst_band, width);
    if (width > 2.0 + eps) out.band_ok = false;
  }
  return out;
}

}  // namespace facetflow
