#include <doctest.h>

#include <cmath>
#include <sstream>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/phase.hpp"

using namespace graphon_lab;
namespace ph = graphon_lab::phase;

namespace {

solver::SolveConfig quick_config() {
  solver::SolveConfig cfg;
  cfg.m = 16;
  cfg.starts = 6;
  cfg.seed = 3;
  cfg.threads = 2;
  return cfg;
}

std::vector<ph::PhasePoint> synthetic_path(const std::vector<double>& s,
                                           const std::vector<std::string>& branch) {
  std::vector<ph::PhasePoint> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i].e = 0.3;
    out[i].t = 0.01 * static_cast<double>(i);
    out[i].s = s[i];
    out[i].branch = branch.empty() ? "bipartite-perturbative" : branch[i];
    out[i].converged = true;
  }
  return out;
}

}  // namespace

TEST_CASE("evaluate cell branches") {
  auto cfg = quick_config();
  ph::PhasePoint p1 = ph::evaluate_cell(0.25, 0.007625, cfg);
  CHECK(p1.s == doctest::Approx(0.22166351426487).epsilon(1e-5));
  CHECK(p1.branch == "bipartite-perturbative");
  CHECK(p1.converged);

  ph::PhasePoint p2 = ph::evaluate_cell(0.3, 0.027, cfg);
  CHECK(p2.s == doctest::Approx(0.30543215102745).epsilon(1e-5));
  CHECK(p2.branch == "constant");

  ph::PhasePoint p3 = ph::evaluate_cell(0.25, 0.0, cfg);
  CHECK(p3.s == doctest::Approx(0.17328679513999).epsilon(1e-5));
  CHECK(p3.branch == "bipartite-perturbative");
}

TEST_CASE("scan grid") {
  auto cfg = quick_config();
  cfg.m = 8;
  ph::GridSpec grid{0.2, 0.3, 2, 0.0, 0.2, 3};  // t = 0.2 rows are infeasible
  ph::ScanTable a = ph::scan(grid, cfg, 2);
  CHECK(a.points.size() + a.skipped.size() == 6);
  CHECK(!a.skipped.empty());
  for (const auto& sk : a.skipped) CHECK(sk.reason == "infeasible");
  for (const auto& p : a.points) {
    CHECK(p.s >= 0.0);
    CHECK(p.s <= 0.34657359027997264 + 1e-9);
  }
  // bitwise reproducibility, independent of thread count
  ph::ScanTable b = ph::scan(grid, cfg, 1);
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t k = 0; k < a.points.size(); ++k) {
    CHECK(a.points[k].s == b.points[k].s);
    CHECK(a.points[k].branch == b.points[k].branch);
  }
}

TEST_CASE("transition detection on synthetic paths") {
  // constant s: no flags
  auto flat = synthetic_path(std::vector<double>(12, 0.25), {});
  CHECK(ph::detect_transition(flat, 20.0).empty());

  // smooth quadratic with one kink
  std::vector<double> s(21);
  for (int i = 0; i <= 20; ++i) {
    double x = i / 20.0;
    s[i] = 0.2 - 0.01 * x * x + (x > 0.6 ? 0.3 * (x - 0.6) : 0.0);
  }
  auto kinky = synthetic_path(s, {});
  auto flags = ph::detect_transition(kinky, 20.0);
  REQUIRE(!flags.empty());
  bool seen = false;
  for (const auto& f : flags)
    if (f.second_difference && std::abs(f.index - 12) <= 1) seen = true;
  CHECK(seen);

  // branch change flag
  std::vector<std::string> tags(12, "bipartite-perturbative");
  for (int i = 7; i < 12; ++i) tags[i] = "numeric-other";
  auto tagged = synthetic_path(std::vector<double>(12, 0.25), tags);
  auto bflags = ph::detect_transition(tagged, 20.0);
  REQUIRE(bflags.size() == 1);
  CHECK(bflags[0].branch_change);
  CHECK(bflags[0].index == 7);

  CHECK_THROWS_AS(ph::detect_transition(synthetic_path({0.1, 0.1, 0.1, 0.1}, {}), 20.0),
                  DomainError);
}

TEST_CASE("legendre transform on a grid") {
  // synthetic table around the entropy maximum at (1/2, 1/8)
  std::vector<ph::PhasePoint> pts;
  for (double e : {0.4, 0.5, 0.6})
    for (double t : {0.1, 0.125, 0.15}) {
      ph::PhasePoint p;
      p.e = e;
      p.t = t;
      p.s = (e == 0.5 && t == 0.125) ? 0.34657359 : 0.2;
      pts.push_back(p);
    }
  auto l0 = ph::legendre(pts, 0.0, 0.0);
  CHECK(l0.value == doctest::Approx(0.34657359).epsilon(1e-12));
  CHECK(l0.e == 0.5);
  CHECK(l0.t == 0.125);
  // psi is nondecreasing in beta1 and convex along beta1
  double prev = -1e300;
  std::vector<double> vals;
  for (double b1 : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
    double v = ph::legendre(pts, b1, 0.0).value;
    CHECK(v >= prev - 1e-12);
    vals.push_back(v);
    prev = v;
  }
  for (std::size_t k = 1; k + 1 < vals.size(); ++k)
    CHECK(vals[k] <= 0.5 * (vals[k - 1] + vals[k + 1]) + 1e-12);
  // large negative beta1 drives the argmax toward small e
  CHECK(ph::legendre(pts, -100.0, 0.0).e == doctest::Approx(0.4));
  CHECK_THROWS_AS(ph::legendre({}, 0.0, 0.0), DomainError);
}

TEST_CASE("region emission") {
  std::ostringstream os;
  ph::emit_region(os, 0.25);
  std::string text = os.str();
  CHECK(text.find("e,t_lower,t_upper,transition_scallop,transition_upper") == 0);
  // row at e = 0.5: t_lower 0, t_upper 0.5^1.5
  CHECK(text.find("0.5,0,0.353553390593") != std::string::npos);
  // cusp rows are appended even though off the 0.25-grid
  CHECK(text.find("0.666666666667,0.222222222222") != std::string::npos);
  // t_upper at e = 0.25 and the upper transition curve 2e^3
  CHECK(text.find("0.25,0,0.125,,0.03125") != std::string::npos);

  std::ostringstream os2;
  ph::emit_boundary_curves(os2, 0.25);
  std::string text2 = os2.str();
  CHECK(text2.find("e,t,curve_tag") == 0);
  CHECK(text2.find(",upper") != std::string::npos);
  CHECK(text2.find(",lower-flat") != std::string::npos);
  CHECK(text2.find(",lower-scallop") != std::string::npos);
  CHECK(text2.find(",transition-scallop") != std::string::npos);
  CHECK(text2.find(",transition-upper") != std::string::npos);
  CHECK(text2.find("0.75,0.375,lower-scallop") != std::string::npos);
}
