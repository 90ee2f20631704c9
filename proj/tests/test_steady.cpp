#include <doctest.h>

#include <cmath>

#include "facetflow/steady.hpp"

using namespace facetflow;

namespace {
const OperatorSpec kL1 = OperatorSpec::tv_plus_linear();
}

TEST_CASE("constant force: stagnation band gives the zero profile") {
  for (double A : {0.0, 1.0, 2.0}) {
    SteadySolution s = solve_constant_force(kL1, A);
    CHECK(s.eval(0.3) == doctest::Approx(0.0));
    CHECK(s.eval_flux(0.5) == doctest::Approx(0.0));
    // Flux stays inside the jump interval everywhere.
    for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) CHECK(std::abs(s.eval_flux(x)) <= 1.0 + 1e-14);
  }
}

TEST_CASE("constant force A=4: facet [1/4, 3/4] at level -1/8") {
  SteadySolution s = solve_constant_force(kL1, 4.0);
  REQUIRE(s.facets.size() == 1);
  CHECK(s.facets[0].left == doctest::Approx(0.25));
  CHECK(s.facets[0].right == doctest::Approx(0.75));
  CHECK(s.facets[0].level == doctest::Approx(-0.125));
  CHECK(s.facets[0].kind == FacetKind::Min);
  // Arm formula u = 2x^2 - x on [0, 1/4].
  CHECK(s.eval(0.125) == doctest::Approx(2.0 * 0.125 * 0.125 - 0.125));
  CHECK(s.eval(1.0) == doctest::Approx(0.0));
  // Flux A(x - 1/2) traverses the jump interval across the facet.
  CHECK(s.eval_flux(0.25) == doctest::Approx(-1.0));
  CHECK(s.eval_flux(0.75) == doctest::Approx(1.0));
}

TEST_CASE("constant force: analytic profile passes flux verification") {
  Grid g(256);
  SteadySolution s = solve_constant_force(kL1, 4.0);
  PiecewiseConstant F{{0.0, 1.0}, {4.0}};
  VerifyReport v = verify_steady(s.sample(g), kL1, F, g, 3.0 * g.h * 4.0);
  CHECK(v.pass);
}

TEST_CASE("constant force: rejects unsupported inputs") {
  CHECK_THROWS_AS(solve_constant_force(OperatorSpec::tv_only(), 4.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_constant_force(kL1, -1.0), std::invalid_argument);
}

TEST_CASE("three-facet endpoints from the energy constraints") {
  CHECK(three_facet_c(16.0) == doctest::Approx(0.35));
  CHECK(three_facet_e(16.0) == doctest::Approx(0.5 - 1.0 / 12.0));
  CHECK(three_facet_c(28.0) == doctest::Approx(0.3125));
  CHECK(three_facet_e(28.0) == doctest::Approx(0.5 - 1.0 / 24.0));
  // Degenerate limit at the breaking threshold.
  CHECK(three_facet_c(12.0) == doctest::Approx(0.375));
  CHECK(three_facet_e(12.0) == doctest::Approx(0.375));
}

TEST_CASE("three-facet: refuses alpha at or below the threshold") {
  CHECK_THROWS_WITH_AS(solve_three_facet(kL1, 12.0), doctest::Contains("REFUSED_NO_BREAKING"),
                       std::invalid_argument);
  CHECK_THROWS_AS(solve_three_facet(kL1, 8.0), std::invalid_argument);
}

TEST_CASE("three-facet alpha=16: structure and smoothness") {
  SteadySolution s = solve_three_facet(kL1, 16.0);
  REQUIRE(s.facets.size() == 3);
  CHECK(s.facets[0].left == doctest::Approx(0.25));
  CHECK(s.facets[0].right == doctest::Approx(0.35));
  CHECK(s.facets[0].level == doctest::Approx(-0.125));
  CHECK(s.facets[1].left == doctest::Approx(0.5 - 1.0 / 12.0));
  CHECK(s.facets[1].right == doctest::Approx(0.5 + 1.0 / 12.0));
  CHECK(s.facets[1].kind == FacetKind::Max);
  CHECK(s.facets[2].left == doctest::Approx(0.65));
  CHECK(s.facets[2].right == doctest::Approx(0.75));

  // W^2_inf regularity: value and slope continuous across piece joints.
  for (std::size_t i = 0; i + 1 < s.pieces.size(); ++i) {
    double x = s.pieces[i].b;
    CHECK(s.pieces[i].eval(x) == doctest::Approx(s.pieces[i + 1].eval(x)).epsilon(1e-12));
    CHECK(s.pieces[i].deriv(x) == doctest::Approx(s.pieces[i + 1].deriv(x)).epsilon(1e-10));
  }
  // Slope vanishes on facets.
  CHECK(std::abs(s.pieces[1].deriv(0.3)) <= 1e-14);

  // Symmetry u(x) = u(1-x).
  for (double x : {0.1, 0.3, 0.42, 0.55}) CHECK(s.eval(x) == doctest::Approx(s.eval(1.0 - x)));

  // Flux selection: sigma in [-1,1] on facets, sigma = u_x + sgn on arcs.
  CHECK(std::abs(s.eval_flux(0.3)) <= 1.0 + 1e-12);
  double x = 0.15;
  CHECK(s.eval_flux(x) == doctest::Approx(s.pieces[0].deriv(x) - 1.0).epsilon(1e-10));
}

TEST_CASE("three-facet: facet flux jumps are +2/-2/+2") {
  SteadySolution s = solve_three_facet(kL1, 16.0);
  PiecewiseConstant f = f_alpha_slice(16.0);
  double expected[3] = {2.0, -2.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    double jump = f.integral(s.facets[i].left, s.facets[i].right);
    CHECK(jump == doctest::Approx(expected[i]).epsilon(1e-12));
  }
}

TEST_CASE("steady ordering: larger ramp gives a nodewise larger state") {
  Grid g(1024);
  Profile u16 = solve_three_facet(kL1, 16.0).sample(g);
  Profile u24 = solve_three_facet(kL1, 24.0).sample(g);
  for (std::size_t i = 0; i < u16.size(); ++i) CHECK(u16[i] <= u24[i] + 1e-12);
}

TEST_CASE("numeric steady: zero force gives zero") {
  Grid g(64);
  PiecewiseConstant F{{0.0, 1.0}, {0.0}};
  SteadyNumericResult r = solve_steady_numeric(kL1, F, g, 1e-10);
  CHECK(r.u.sup_norm() <= 1e-12);
  CHECK(r.residual <= 1e-10);
}

TEST_CASE("numeric steady matches the constant-force closed form") {
  Grid g(256);
  PiecewiseConstant F{{0.0, 1.0}, {4.0}};
  SteadyNumericResult r = solve_steady_numeric(kL1, F, g, 1e-9);
  Profile exact = solve_constant_force(kL1, 4.0).sample(g);
  CHECK(sup_distance(r.u, exact) <= 2.0 * g.h);
}

TEST_CASE("numeric steady matches the three-facet closed form") {
  Grid g(256);
  SteadyNumericResult r = solve_steady_numeric(kL1, f_alpha_slice(16.0), g, 1e-9);
  Profile exact = solve_three_facet(kL1, 16.0).sample(g);
  CHECK(sup_distance(r.u, exact) <= 2.0 * g.h);
}

TEST_CASE("verify_steady: band forces accept zero, others reject it") {
  Grid g(128);
  Profile zero = Profile::zeros(g);
  PiecewiseConstant band{{0.0, 0.5, 1.0}, {2.0, -2.0}};  // primitive range 1
  VerifyReport ok = verify_steady(zero, kL1, band, g, 1e-12);
  CHECK(ok.pass);
  CHECK(ok.violation <= 1e-14);

  PiecewiseConstant strong{{0.0, 1.0}, {4.0}};  // primitive range 4 > 2
  VerifyReport bad = verify_steady(zero, kL1, strong, g, 1e-6);
  CHECK(!bad.pass);
  CHECK(bad.violation == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("f_alpha slice term list") {
  PiecewiseConstant f = f_alpha_slice(16.0);
  CHECK(f.eval(0.1) == doctest::Approx(4.0));
  CHECK(f.eval(0.3) == doctest::Approx(20.0));
  CHECK(f.eval(0.5) == doctest::Approx(-12.0));
  CHECK(f.eval(0.7) == doctest::Approx(20.0));
  CHECK(f.eval(0.9) == doctest::Approx(4.0));
  CHECK(f.integral(0.0, 1.0) == doctest::Approx(4.0));  // zero-mean ramp
}
