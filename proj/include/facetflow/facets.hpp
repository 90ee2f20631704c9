#ifndef FACETFLOW_FACETS_HPP
#define FACETFLOW_FACETS_HPP

#include <vector>

#include "facetflow/model.hpp"

namespace facetflow {

enum class FacetKind { Min, Max, InflectionFlat, Boundary };

const char* facet_kind_name(FacetKind k);

struct Facet {
  double left = 0.0;
  double right = 0.0;
  double level = 0.0;
  FacetKind kind = FacetKind::InflectionFlat;

  double length() const { return right - left; }
};

struct FacetSet {
  std::vector<Facet> facets;
  double slope_tol = 0.0;
  double min_length = 0.0;

  int count(FacetKind k) const;
  /// Interior extremum facets (Min or Max).
  std::vector<Facet> extrema() const;
};

/// Maximal runs of consecutive edges with |Du| <= slope_tol, of length
/// >= min_length. Kind from the adjacent slope signs: entering negative
/// and leaving positive is a minimum, the reverse a maximum; runs touching
/// a boundary are Boundary, everything else InflectionFlat.
FacetSet detect_facets(const std::vector<double>& values, const Grid& grid, double slope_tol,
                       double min_length);
FacetSet detect_facets(const Profile& u, const Grid& grid, double slope_tol, double min_length);

/// Default detection parameters for evolved profiles: slopes below grid
/// resolution are flat, and anything under four cells is noise.
double default_slope_tol(const Grid& grid);
double default_min_length(const Grid& grid);

struct CreationBound {
  bool pass = false;
  double linf_bound = 0.0;  // 2 / (|f|_inf + |u_t|_inf), the sharp form
  double l2_bound = 0.0;    // (2 / (|f|_inf + |u_t|_2))^2, the weak form
  double length = 0.0;
};

/// Facet-length lower bound at an extremum. Refuses non-extremum kinds.
/// grid_slack is subtracted from the sharp bound (2h for a grid check).
CreationBound creation_bound_check(const Facet& facet, double f_inf, double ut_inf,
                                   double grid_slack, double ut_l2 = -1.0);

/// |int_facet F dx - expected_jump| from the exact term list. Under the
/// steady convention d/dx L(u_x) = F the expected jump is +2 over a
/// minimum facet and -2 over a maximum facet.
double facet_flux_balance(const Facet& facet, const PiecewiseConstant& F, double expected_jump);

struct StagnationConditions {
  bool support_ok = false;    // supp f(t)-f(0) inside [xi-, xi+]
  bool mean_ok = false;       // int_{xi-}^{xi+} f(.,t) = 2
  bool interior_ok = false;   // |int_a^b f| < 2 on interior subintervals
  bool band_ok = false;       // primitive range width <= 2
  double worst_mean = 0.0;    // worst |mean - 2| over sampled times
  double worst_interior = 0.0;
  double worst_band = 0.0;    // worst primitive range width

  bool all_ok() const { return support_ok && mean_ok && interior_ok; }
};

/// Evaluates the three sufficient conditions for steady-state stagnation
/// exactly from the term list at each sampled time, plus the
/// zero-solution band condition.
StagnationConditions stagnation_conditions_check(const ForceField& force, double xi_minus,
                                                 double xi_plus,
                                                 const std::vector<double>& t_samples);

}  // namespace facetflow

#endif  // FACETFLOW_FACETS_HPP
