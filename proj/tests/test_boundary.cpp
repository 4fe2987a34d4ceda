#include <doctest.h>

#include <cmath>
#include <random>

#include "graphon_lab/boundary.hpp"
#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/util.hpp"

using namespace graphon_lab;
namespace bd = graphon_lab::boundary;

TEST_CASE("bipartite optimizer") {
  StepGraphon g = bd::bipartite_optimizer(0.25);
  CHECK(g.value(0, 1) == 0.5);
  CHECK(g.value(0, 0) == 0.0);
  CHECK(rate(g) == doctest::Approx(rate_pointwise(0.5) / 2.0).epsilon(1e-15));
  CHECK(rate(g) == doctest::Approx(-0.17328679514).epsilon(1e-9));
  CHECK(rate(bd::bipartite_optimizer(0.0)) == 0.0);
  CHECK(rate(bd::bipartite_optimizer(0.5)) == 0.0);  // value 1 off the diagonal
  CHECK_THROWS_AS(bd::bipartite_optimizer(0.6), DomainError);
  CHECK_THROWS_AS(bd::bipartite_optimizer(-0.1), DomainError);
}

TEST_CASE("scallop parameters") {
  auto sp = bd::scallop_params(2.0 / 3.0);
  CHECK(sp.ell == 2);
  CHECK(sp.c == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(sp.p == doctest::Approx(1.0).epsilon(1e-9));

  auto sp6 = bd::scallop_params(0.6);
  CHECK(sp6.ell == 2);
  CHECK(sp6.c == doctest::Approx(0.43874258867228).epsilon(1e-12));
  CHECK(sp6.p == doctest::Approx(0.68254964117945).epsilon(1e-10));

  auto sp75 = bd::scallop_params(0.75);
  CHECK(sp75.ell == 3);
  CHECK(sp75.c == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(sp75.p == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(bd::scallop_params(0.5), DomainError);
  CHECK_THROWS_AS(bd::scallop_params(1.0), DomainError);
}

TEST_CASE("scallop optimizer") {
  // cusp e_2: equal tripartite structure
  StepGraphon tri = bd::scallop_optimizer(2.0 / 3.0);
  CHECK(triangle_density(tri) == doctest::Approx(2.0 / 9.0).epsilon(1e-9));

  StepGraphon g6 = bd::scallop_optimizer(0.6);
  CHECK(edge_density(g6) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(triangle_density(g6) == doctest::Approx(0.14150098817703).epsilon(1e-10));
  auto sp = bd::scallop_params(0.6);
  // value identity: rate equals the closed form in (ell, c, p)
  double last = 1.0 - (sp.ell - 1.0) * sp.c;
  CHECK(rate(g6) == doctest::Approx(0.5 * last * last * rate_pointwise(sp.p)).epsilon(1e-12));
  // cross-check the triangle density against the 3 c p (1-c)^2 / 2 shape
  CHECK(triangle_density(g6) ==
        doctest::Approx(1.5 * sp.c * sp.p * (1 - sp.c) * (1 - sp.c)).epsilon(1e-12));

  // construction identities across the scallop range
  for (double e : {0.52, 0.58, 0.64, 0.71, 0.78, 0.86, 0.93}) {
    StepGraphon g = bd::scallop_optimizer(e);
    CHECK(edge_density(g) == doctest::Approx(e).epsilon(1e-10));
    auto s = bd::scallop_params(e);
    double w = 1.0 - (s.ell - 1.0) * s.c;
    CHECK(rate(g) == doctest::Approx(0.5 * w * w * rate_pointwise(s.p)).epsilon(1e-10));
  }
}

TEST_CASE("minimum triangle curve") {
  CHECK(bd::min_triangle(0.4) == 0.0);
  CHECK(bd::min_triangle(0.5) == 0.0);
  for (int k = 1; k <= 4; ++k) {
    double ek = static_cast<double>(k) / (k + 1.0);
    CHECK(bd::min_triangle(ek) == doctest::Approx(ek * (2.0 * ek - 1.0)).epsilon(1e-9));
  }
  double v6 = bd::min_triangle(0.6);
  CHECK(v6 == doctest::Approx(0.14150098817703).epsilon(1e-10));
  CHECK(v6 > 0.6 * 0.2);  // strictly above e(2e-1) = 0.12 inside the scallop

  // continuity at 1/2 and at the first cusps
  CHECK(bd::min_triangle(0.5 + 1e-9) <= 1e-6);
  for (int k = 2; k <= 4; ++k) {
    double ek = static_cast<double>(k) / (k + 1.0);
    double below = bd::min_triangle(ek - 1e-7);
    double above = bd::min_triangle(ek + 1e-7);
    CHECK(std::abs(above - below) < 1e-3);
  }

  // nondecreasing on a grid
  double prev = 0.0;
  for (int i = 0; i <= 990; ++i) {
    double e = i * 1e-3;
    double v = bd::min_triangle(e);
    CHECK(v >= prev - 1e-9);
    prev = v;
  }

  // closed form used for fine scallops matches the block sum where both run
  for (double e : {0.955, 0.97, 0.982}) {
    auto sp = bd::scallop_params(e);
    REQUIRE(sp.ell > 20);
    CHECK(bd::min_triangle(e) ==
          doctest::Approx(triangle_density(bd::scallop_optimizer(e))).epsilon(1e-11));
  }
}

TEST_CASE("maximum triangle curve and feasibility") {
  CHECK(bd::max_triangle(0.0) == 0.0);
  CHECK(bd::max_triangle(1.0) == 1.0);
  CHECK(bd::max_triangle(0.25) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(bd::feasible(0.25, 0.05));
  CHECK_FALSE(bd::feasible(0.25, 0.2));
  CHECK_FALSE(bd::feasible(0.6, 0.12));
  CHECK(bd::feasible(0.5, 0.125));
  CHECK(bd::feasible(1.0, 1.0));
  CHECK_FALSE(bd::feasible(1.1, 0.5));
  CHECK_FALSE(bd::feasible(0.9999999, 0.5));
}

TEST_CASE("perturbative optimizer") {
  StepGraphon g0 = bd::perturbative_optimizer(0.25, 0.0);
  CHECK(g0.value(0, 0) == 0.0);
  CHECK(g0.value(0, 1) == 0.5);

  StepGraphon g = bd::perturbative_optimizer(0.25, 0.05);
  CHECK(edge_density(g) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(triangle_density(g) == doctest::Approx(0.007625).epsilon(1e-13));

  // eps = 2e: the family ends in two independent halves of density 2e
  StepGraphon g2 = bd::perturbative_optimizer(0.25, 0.5);
  CHECK(g2.value(0, 0) == 0.5);
  CHECK(g2.value(0, 1) == 0.0);
  CHECK(triangle_density(g2) == doctest::Approx(2.0 * std::pow(0.25, 3)).epsilon(1e-13));

  CHECK_THROWS_AS(bd::perturbative_optimizer(0.25, 0.6), DomainError);
  CHECK_THROWS_AS(bd::perturbative_optimizer(0.25, -0.01), DomainError);
  // above e = 1/2 the family exists until the cross value saturates
  StepGraphon g3 = bd::perturbative_optimizer(0.55, 0.1);
  CHECK(g3.value(0, 1) == 1.0);
  CHECK_THROWS_AS(bd::perturbative_optimizer(0.55, 0.05), DomainError);

  // triangle identity on random parameters
  std::mt19937_64 rng = rng_stream(21, 0);
  std::uniform_real_distribution<double> ue(0.05, 0.45);
  for (int trial = 0; trial < 50; ++trial) {
    double e = ue(rng);
    std::uniform_real_distribution<double> ueps(0.0, 2.0 * e);
    double eps = ueps(rng);
    StepGraphon p = bd::perturbative_optimizer(e, eps);
    CHECK(triangle_density(p) ==
          doctest::Approx(e * e * e - std::pow(e - eps, 3)).epsilon(1e-12));
  }
}

TEST_CASE("perturbative entropy") {
  CHECK(bd::perturbative_entropy(0.25, 0.05) == doctest::Approx(0.22166351426487).epsilon(1e-11));
  CHECK(bd::perturbative_entropy(0.25, 0.0) == doctest::Approx(0.17328679513999).epsilon(1e-11));
  CHECK(bd::perturbative_entropy(0.25, 0.25) == doctest::Approx(0.28116757230940).epsilon(1e-11));
  // equals minus the rate of the constructed graphon exactly
  std::mt19937_64 rng = rng_stream(22, 0);
  std::uniform_real_distribution<double> ue(0.05, 0.45);
  for (int trial = 0; trial < 20; ++trial) {
    double e = ue(rng);
    std::uniform_real_distribution<double> ueps(0.0, 2.0 * e);
    double eps = ueps(rng);
    CHECK(bd::perturbative_entropy(e, eps) ==
          doctest::Approx(-rate(bd::perturbative_optimizer(e, eps))).epsilon(1e-13));
  }
}

TEST_CASE("triangle density inversion") {
  CHECK(bd::eps_from_t(0.25, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(bd::eps_from_t(0.25, 0.03125) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bd::eps_from_t(0.25, 0.007625) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK_THROWS_AS(bd::eps_from_t(0.25, 0.04), DomainError);
  CHECK_THROWS_AS(bd::eps_from_t(0.25, -0.01), DomainError);
  std::mt19937_64 rng = rng_stream(23, 0);
  std::uniform_real_distribution<double> ue(0.05, 0.45);
  for (int trial = 0; trial < 100; ++trial) {
    double e = ue(rng);
    std::uniform_real_distribution<double> ueps(0.0, 2.0 * e);
    double eps = ueps(rng);
    double t = e * e * e - std::pow(e - eps, 3);
    double back = bd::eps_from_t(e, t);
    CHECK(std::abs(e * e * e - std::pow(e - back, 3) - t) <= 1e-12);
  }
}

TEST_CASE("transition curves") {
  CHECK(bd::transition_curve_scallop(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(bd::transition_curve_scallop(0.6) == doctest::Approx(0.152).epsilon(1e-13));
  CHECK(bd::transition_curve_scallop(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS_AS(bd::transition_curve_scallop(0.4), DomainError);
  CHECK(bd::transition_curve_upper(0.25) == doctest::Approx(0.03125).epsilon(1e-14));
  CHECK(bd::transition_curve_upper(0.3) == doctest::Approx(0.054).epsilon(1e-14));
  CHECK_THROWS_AS(bd::transition_curve_upper(0.5), DomainError);
  // algebraic identity: at e = (1+x)/2 the curve value is (x^3 + 3x)/4
  std::mt19937_64 rng = rng_stream(24, 0);
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    double x = ux(rng);
    CHECK(bd::transition_curve_scallop((1.0 + x) / 2.0) ==
          doctest::Approx((x * x * x + 3.0 * x) / 4.0).epsilon(1e-12));
  }
}

TEST_CASE("perturbative parameter bundle") {
  auto p = bd::PerturbativeParams::from_eps(0.25, 0.05);
  CHECK(p.t == doctest::Approx(0.007625).epsilon(1e-13));
  CHECK(p.s == doctest::Approx(0.22166351426487).epsilon(1e-11));
  auto q = bd::PerturbativeParams::from_t(0.25, p.t);
  CHECK(q.eps == doctest::Approx(0.05).epsilon(1e-11));
  CHECK(std::abs(q.s - p.s) <= 1e-12);
}

TEST_CASE("analytic multiplier") {
  CHECK(bd::lambda2_analytic(0.25, 0.05) == doctest::Approx(5.71618392438).epsilon(1e-10));
  CHECK_THROWS_AS(bd::lambda2_analytic(0.25, 0.25), DomainError);  // singular at eps = e
  CHECK_THROWS_AS(bd::lambda2_analytic(0.25, 0.0), DomainError);
  // coefficients of the second-variation bound at small eps
  auto co = bd::perturbative_coefficients(0.25, 1e-3);
  CHECK(co.c1 > 0.0);
  CHECK(co.c2 > 1.0);
  CHECK(co.c3 > 0.0);
  CHECK(co.c1 * co.c2 > co.c3 * co.c3);
}

TEST_CASE("asymmetric family") {
  auto mid = bd::solve_asymmetric(0.5, 0.25, 0.007625);
  CHECK(mid.alpha == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(mid.beta == doctest::Approx(0.05).epsilon(1e-10));
  CHECK(mid.p == doctest::Approx(0.45).epsilon(1e-10));

  auto flat = bd::solve_asymmetric(0.5, 0.3, 0.0);
  CHECK(flat.alpha == 0.0);
  CHECK(flat.beta == 0.0);
  CHECK(flat.p == doctest::Approx(0.6).epsilon(1e-12));

  // symmetry and the off-center penalty
  StepGraphon off = bd::asymmetric_family(0.48, 0.25, 0.007625);
  CHECK(edge_density(off) == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(triangle_density(off) == doctest::Approx(0.007625).epsilon(1e-10));
  CHECK(rate(off) > rate(mid.graphon));
  auto left = bd::solve_asymmetric(0.47, 0.25, 0.007625);
  auto right = bd::solve_asymmetric(0.53, 0.25, 0.007625);
  CHECK(rate(left.graphon) == doctest::Approx(rate(right.graphon)).epsilon(1e-10));
  CHECK(left.alpha == doctest::Approx(right.beta).epsilon(1e-8));
}

TEST_CASE("curvature of the asymmetric family") {
  auto curv = bd::second_derivative_in_c(0.25, 5e-4);
  CHECK(curv.value >= 16.0 * 0.25 * 0.25 - 0.05);
  CHECK(curv.error < 1e-3);
  // relabeling symmetry: the first derivative vanishes at c = 1/2
  double h = 1e-3;
  double f_plus = rate(bd::asymmetric_family(0.5 + h, 0.25, 5e-4));
  double f_minus = rate(bd::asymmetric_family(0.5 - h, 0.25, 5e-4));
  CHECK(std::abs(f_plus - f_minus) / (2.0 * h) <= 1e-6);
  CHECK_THROWS_AS(bd::second_derivative_in_c(0.25, 0.02), DomainError);  // t guard
}
