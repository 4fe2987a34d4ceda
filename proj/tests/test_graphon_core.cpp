#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/simple_graph.hpp"
#include "graphon_lab/step_graphon.hpp"
#include "graphon_lab/util.hpp"

using namespace graphon_lab;

namespace {

StepGraphon random_step(std::mt19937_64& rng, std::size_t m) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> v(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) v[i * m + j] = v[j * m + i] = uni(rng);
  return StepGraphon::equal_blocks(m, v);
}

SimpleGraph random_graph(std::mt19937_64& rng, int n) {
  SimpleGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng() & 1ull) g.set_edge(i, j, true);
  return g;
}

// Exhaustive cut-norm oracle: every S,T subset pair on the common refinement.
double cut_distance_bruteforce(const StepGraphon& f, const StepGraphon& g) {
  std::vector<double> bounds = merged_boundaries(f.boundaries(), g.boundaries());
  StepGraphon fr = f.refined(bounds), gr = g.refined(bounds);
  std::size_t m = fr.num_blocks();
  REQUIRE(m <= 12);
  double best = 0.0;
  for (std::uint64_t s = 0; s < (1ull << m); ++s)
    for (std::uint64_t t = 0; t < (1ull << m); ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!((s >> i) & 1ull)) continue;
        for (std::size_t j = 0; j < m; ++j) {
          if (!((t >> j) & 1ull)) continue;
          acc += fr.width(i) * fr.width(j) * (fr.value(i, j) - gr.value(i, j));
        }
      }
      best = std::max(best, std::abs(acc));
    }
  return best;
}

}  // namespace

TEST_CASE("step graphon validation") {
  CHECK_THROWS_AS(StepGraphon({0.0, 0.4}, {{0.5}}), DomainError);  // last != 1
  CHECK_THROWS_AS(StepGraphon({0.0, 0.6, 0.4, 1.0},
                              {{0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}, {0.1, 0.1, 0.1}}),
                  DomainError);  // not increasing
  CHECK_THROWS_AS(StepGraphon({0.0, 0.5, 1.0}, {{0.1, 0.2}, {0.3, 0.1}}), DomainError);
  CHECK_THROWS_AS(StepGraphon({0.0, 1.0}, {{1.5}}), DomainError);
  StepGraphon g({0.0, 0.5, 1.0}, {{0.1, 0.2}, {0.2, 0.3}});
  CHECK(g.num_blocks() == 2);
  CHECK(g.value_at(0.25, 0.75) == 0.2);
  CHECK(g.value_at(1.0, 1.0) == 0.3);
}

TEST_CASE("checkerboard embedding") {
  SimpleGraph empty3(3);
  StepGraphon cb0 = checkerboard(empty3);
  CHECK(cb0.num_blocks() == 3);
  CHECK(edge_density(cb0) == 0.0);

  StepGraphon cbk3 = checkerboard(SimpleGraph::complete(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(cbk3.value(i, j) == (i == j ? 0.0 : 1.0));
  CHECK(edge_density(cbk3) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  StepGraphon cbe = checkerboard(SimpleGraph::from_edges(2, {{0, 1}}));
  CHECK(cbe.value(0, 1) == 1.0);
  CHECK(cbe.value(0, 0) == 0.0);
  CHECK(edge_density(cbe) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("checkerboard densities equal graph count ratios") {
  std::mt19937_64 rng = rng_stream(11, 0);
  for (int trial = 0; trial < 60; ++trial) {
    int n = 3 + static_cast<int>(rng() % 5);
    SimpleGraph g = random_graph(rng, n);
    StepGraphon cb = checkerboard(g);
    double n2 = static_cast<double>(n) * n;
    CHECK(edge_density(cb) == doctest::Approx(2.0 * g.edge_count() / n2).epsilon(1e-13));
    CHECK(triangle_density(cb) ==
          doctest::Approx(6.0 * g.triangle_count() / (n2 * n)).epsilon(1e-13));
  }
}

TEST_CASE("edge and triangle densities") {
  CHECK(edge_density(StepGraphon::constant(0.3)) == doctest::Approx(0.3).epsilon(1e-15));
  StepGraphon thm2({0.0, 0.5, 1.0}, {{0.0, 0.5}, {0.5, 0.0}});
  CHECK(edge_density(thm2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(triangle_density(thm2) == 0.0);
  CHECK(triangle_density(StepGraphon::constant(0.5)) == doctest::Approx(0.125).epsilon(1e-14));
  StepGraphon pert({0.0, 0.5, 1.0}, {{0.05, 0.45}, {0.45, 0.05}});
  CHECK(triangle_density(pert) == doctest::Approx(0.007625).epsilon(1e-12));
}

TEST_CASE("hom density") {
  std::mt19937_64 rng = rng_stream(12, 0);
  for (int trial = 0; trial < 20; ++trial) {
    StepGraphon g = random_step(rng, 2 + rng() % 5);
    CHECK(hom_density(motifs::edge(), g) == doctest::Approx(edge_density(g)).epsilon(1e-12));
    CHECK(hom_density(motifs::complete(3), g) ==
          doctest::Approx(triangle_density(g)).epsilon(1e-12));
  }
  CHECK(hom_density(motifs::path(3), StepGraphon::constant(0.5)) ==
        doctest::Approx(0.25).epsilon(1e-14));
  // complexity guard: 8 motif vertices over 20 blocks is 2.6e10 terms
  StepGraphon big = random_step(rng, 20);
  CHECK_THROWS_AS(hom_density(motifs::complete(8), big), ResourceError);
}

TEST_CASE("pointwise rate function") {
  CHECK(rate_pointwise(0.5) == doctest::Approx(-std::log(2.0) / 2.0).epsilon(1e-15));
  CHECK(rate_pointwise(0.0) == 0.0);
  CHECK(rate_pointwise(1.0) == 0.0);
  StepGraphon thm2({0.0, 0.5, 1.0}, {{0.0, 0.5}, {0.5, 0.0}});
  CHECK(rate(thm2) == doctest::Approx(rate_pointwise(0.5) / 2.0).epsilon(1e-15));
  for (int k = 1; k < 200; ++k) CHECK(rate_pointwise_d2(k / 200.0) >= 2.0 - 1e-12);
}

TEST_CASE("rate bounds and permutation invariance") {
  std::mt19937_64 rng = rng_stream(13, 0);
  const double lo = -std::log(2.0) / 2.0;
  for (int trial = 0; trial < 40; ++trial) {
    std::size_t m = 2 + rng() % 7;
    StepGraphon g = random_step(rng, m);
    double r = rate(g);
    CHECK(r >= lo - 1e-12);
    CHECK(r <= 1e-12);
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    StepGraphon pg = g.permuted(perm);
    CHECK(rate(pg) == doctest::Approx(r).epsilon(1e-13));
    CHECK(edge_density(pg) == doctest::Approx(edge_density(g)).epsilon(1e-13));
    CHECK(triangle_density(pg) == doctest::Approx(triangle_density(g)).epsilon(1e-13));
  }
}

TEST_CASE("auxiliary kernel h") {
  StepGraphon hc = aux_h(StepGraphon::constant(0.3));
  CHECK(hc.value(0, 0) == doctest::Approx(0.09).epsilon(1e-15));
  StepGraphon thm2({0.0, 0.5, 1.0}, {{0.0, 0.5}, {0.5, 0.0}});
  StepGraphon h2 = aux_h(thm2);
  CHECK(h2.value(0, 0) == doctest::Approx(0.125).epsilon(1e-15));  // (2e)^2/2 at e=1/4
  CHECK(h2.value(0, 1) == 0.0);
  StepGraphon cbe = checkerboard(SimpleGraph::from_edges(2, {{0, 1}}));
  StepGraphon he = aux_h(cbe);
  CHECK(he.value(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(he.value(0, 1) == 0.0);
}

TEST_CASE("labeled cut distance") {
  std::mt19937_64 rng = rng_stream(14, 0);
  StepGraphon g = random_step(rng, 5);
  CHECK(cut_distance_labeled(g, g).value == 0.0);
  CHECK(cut_distance_labeled(StepGraphon::constant(0.0), StepGraphon::constant(1.0)).value ==
        doctest::Approx(1.0).epsilon(1e-15));

  for (int trial = 0; trial < 12; ++trial) {
    StepGraphon a = random_step(rng, 2 + rng() % 4);
    StepGraphon b = random_step(rng, 2 + rng() % 4);
    CutDistance d = cut_distance_labeled(a, b);
    CHECK(d.exact);
    CHECK(d.value == doctest::Approx(cut_distance_bruteforce(a, b)).epsilon(1e-12));
  }

  // Constant 1/2 against the two-block optimizers; exhaustive-oracle values.
  StepGraphon half = StepGraphon::constant(0.5);
  StepGraphon bip_half({0.0, 0.5, 1.0}, {{0.0, 1.0}, {1.0, 0.0}});
  CutDistance d1 = cut_distance_labeled(half, bip_half);
  CHECK(d1.value == doctest::Approx(cut_distance_bruteforce(half, bip_half)).epsilon(1e-13));
  CHECK(d1.value == doctest::Approx(0.125).epsilon(1e-13));
  StepGraphon bip_q({0.0, 0.5, 1.0}, {{0.0, 0.5}, {0.5, 0.0}});
  CutDistance d2 = cut_distance_labeled(half, bip_q);
  CHECK(d2.value == doctest::Approx(cut_distance_bruteforce(half, bip_q)).epsilon(1e-13));
  CHECK(d2.value == doctest::Approx(0.25).epsilon(1e-13));  // the edge-density gap binds

  for (int trial = 0; trial < 20; ++trial) {
    StepGraphon a = random_step(rng, 2 + rng() % 4);
    StepGraphon b = random_step(rng, 2 + rng() % 4);
    CHECK(cut_distance_labeled(a, b).value >=
          std::abs(edge_density(a) - edge_density(b)) - 1e-12);
  }

  StepGraphon big_a = random_step(rng, 22);
  StepGraphon big_b = random_step(rng, 22);
  CutDistance d3 = cut_distance_labeled(big_a, big_b);
  CHECK_FALSE(d3.exact);  // beyond the 2^m enumeration threshold: lower bound
  CHECK(d3.value >= std::abs(edge_density(big_a) - edge_density(big_b)) - 1e-12);
}

TEST_CASE("hom metric") {
  std::mt19937_64 rng = rng_stream(15, 0);
  StepGraphon g = random_step(rng, 4);
  CHECK(hom_metric(g, g, default_motifs()) == 0.0);
  CHECK(hom_metric(StepGraphon::constant(0.2), StepGraphon::constant(0.7), {motifs::edge()}) ==
        doctest::Approx(0.25).epsilon(1e-14));
  CHECK(hom_metric(StepGraphon::constant(0.0), StepGraphon::constant(1.0),
                   {motifs::edge(), motifs::complete(3)}) ==
        doctest::Approx(0.75).epsilon(1e-14));
  CHECK(default_motifs().size() == 9);
}

TEST_CASE("graph counts and toggle deltas") {
  SimpleGraph k4 = SimpleGraph::complete(4);
  CHECK(k4.edge_count() == 6);
  CHECK(k4.triangle_count() == 4);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      auto [de, dt] = k4.toggle_edge_delta(i, j);
      CHECK(de == -1);
      CHECK(dt == -2);
    }
  SimpleGraph empty(5);
  auto [de, dt] = empty.toggle_edge_delta(0, 1);
  CHECK(de == 1);
  CHECK(dt == 0);
  CHECK_THROWS_AS(empty.toggle_edge_delta(2, 2), DomainError);
}

TEST_CASE("toggle deltas agree with recounting") {
  std::mt19937_64 rng = rng_stream(16, 0);
  SimpleGraph g = random_graph(rng, 20);
  std::uniform_int_distribution<int> pick(0, 19);
  long long edges = g.edge_count(), tris = g.triangle_count();
  for (int step = 0; step < 10000; ++step) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    auto [de, dt] = g.toggle_edge_delta(i, j);
    g.toggle_edge(i, j);
    edges += de;
    tris += dt;
  }
  CHECK(edges == g.edge_count());
  CHECK(tris == g.triangle_count());
}

TEST_CASE("refine and resample") {
  StepGraphon thm2({0.0, 0.5, 1.0}, {{0.0, 0.5}, {0.5, 0.0}});
  StepGraphon fine = thm2.refined({0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(fine.num_blocks() == 4);
  CHECK(edge_density(fine) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fine.value(0, 2) == 0.5);
  CHECK(fine.value(0, 1) == 0.0);
  StepGraphon back = fine.resampled(2);
  CHECK(back.value(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(back.value(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  StepGraphon odd = thm2.resampled(3);
  CHECK(edge_density(odd) == doctest::Approx(0.25).epsilon(1e-13));
}
