#include "graphon_lab/phase.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "graphon_lab/boundary.hpp"
#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/util.hpp"

namespace graphon_lab::phase {

namespace {

constexpr double kValueTol = 1e-4;   // value agreement for a branch tag
constexpr double kShapeTol = 0.02;   // reduced-graphon distance for a branch tag
constexpr double kMaxEntropy = 0.34657359027997264 + 1e-9;  // ln2/2

struct Candidate {
  std::string tag;
  StepGraphon graphon;
  double value;  // rate
};

double l1_to_constant(const StepGraphon& g, double u) {
  double s = 0.0;
  std::size_t m = g.num_blocks();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      s += g.width(i) * g.width(j) * std::abs(g.value(i, j) - u);
  return s;
}

std::vector<Candidate> analytic_candidates(double e, double t) {
  std::vector<Candidate> out;
  // Order fixes the tag precedence where candidates coincide (at t = e^3 the
  // perturbative family passes through the constant graphon).
  if (std::abs(t - e * e * e) <= 1e-9 && e > 0.0 && e < 1.0) {
    StepGraphon g = StepGraphon::constant(e);
    out.push_back({"constant", g, rate(g)});
  }
  try {
    StepGraphon g = boundary::perturbative_optimizer(e, boundary::eps_from_t(e, t));
    out.push_back({"bipartite-perturbative", g, rate(g)});
  } catch (const DomainError&) {
  }
  if (e > 0.5) {
    try {
      if (std::abs(t - boundary::min_triangle(e)) <= 1e-9) {
        StepGraphon g = boundary::scallop_optimizer(e);
        out.push_back({"scallop-" + std::to_string(boundary::scallop_params(e).ell), g, rate(g)});
      }
    } catch (const DomainError&) {
    }
  }
  return out;
}

}  // namespace

PhasePoint evaluate_cell(double e, double t, const solver::SolveConfig& config) {
  std::vector<Candidate> cands = analytic_candidates(e, t);
  PhasePoint pt;
  pt.e = e;
  pt.t = t;

  bool have_numeric = false;
  solver::SolveResult numeric{StepGraphon::constant(0.0), 0, 0, 0, 0, 0, 0, false, -1, false, 0};
  try {
    numeric = solver::minimize_rate(e, t, config);
    have_numeric = true;
  } catch (const ConvergenceError&) {
    have_numeric = false;
  }

  double best_s = -1e300;
  if (have_numeric) best_s = -numeric.value;
  const Candidate* best_cand = nullptr;
  for (const Candidate& c : cands) {
    if (-c.value > best_s) best_s = -c.value;
    if (!best_cand || c.value < best_cand->value) best_cand = &c;
  }
  pt.s = best_s;
  pt.converged = have_numeric && numeric.converged;
  pt.el_residual = have_numeric ? numeric.el_residual_sup : -1.0;

  if (have_numeric) {
    StepGraphon canon = solver::canonicalize(numeric.graphon);
    std::vector<double> vals;
    for (std::size_t i = 0; i < canon.num_blocks(); ++i)
      for (std::size_t j = i; j < canon.num_blocks(); ++j)
        vals.push_back(std::round(canon.value(i, j) * 1e4) / 1e4);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() > 16) vals.resize(16);
    pt.opt_values = std::move(vals);
  }

  if (have_numeric) {
    for (const Candidate& c : cands) {
      if (std::abs(numeric.value - c.value) > kValueTol) continue;
      double dist = c.graphon.num_blocks() == 1
                        ? l1_to_constant(numeric.graphon, c.graphon.value(0, 0))
                        : solver::compare_reduced(numeric.graphon, c.graphon);
      if (dist <= kShapeTol) {
        pt.branch = c.tag;
        pt.branch_distance = dist;
        break;
      }
    }
    if (pt.branch == "numeric-other" && best_cand &&
        best_cand->value < numeric.value - kValueTol) {
      // The analytic branch is strictly better than anything the solver
      // found; report the analytic source.
      pt.branch = best_cand->tag;
      pt.branch_distance = solver::compare_reduced(numeric.graphon, best_cand->graphon);
    }
  } else if (best_cand) {
    pt.branch = best_cand->tag;
    pt.branch_distance = 0.0;
  } else {
    throw ConvergenceError("evaluate_cell: solver failed and no analytic candidate applies");
  }

  assert(pt.s >= -1e-9 && pt.s <= kMaxEntropy && "entropy outside [0, ln2/2]");
  return pt;
}

ScanTable scan(const GridSpec& grid, const solver::SolveConfig& config, int threads) {
  if (grid.e_steps < 1 || grid.t_steps < 1) throw DomainError("scan: grid steps must be positive");
  std::vector<std::pair<double, double>> cells;
  for (int i = 0; i < grid.e_steps; ++i)
    for (int j = 0; j < grid.t_steps; ++j) {
      double e = grid.e_steps == 1
                     ? grid.e_min
                     : grid.e_min + (grid.e_max - grid.e_min) * i / (grid.e_steps - 1.0);
      double t = grid.t_steps == 1
                     ? grid.t_min
                     : grid.t_min + (grid.t_max - grid.t_min) * j / (grid.t_steps - 1.0);
      cells.emplace_back(e, t);
    }
  ScanTable table{grid, config, {}, {}};
  std::vector<int> status(cells.size(), 0);  // 0 skip-infeasible, 1 solved, 2 failed
  std::vector<PhasePoint> pts(cells.size());
  parallel_for_index(cells.size(), threads, [&](std::size_t k) {
    auto [e, t] = cells[k];
    if (!boundary::feasible(e, t)) {
      status[k] = 0;
      return;
    }
    try {
      pts[k] = evaluate_cell(e, t, config);
      status[k] = 1;
    } catch (const ConvergenceError&) {
      status[k] = 2;
    }
  });
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (status[k] == 1) table.points.push_back(pts[k]);
    else if (status[k] == 0) table.skipped.push_back({cells[k].first, cells[k].second, "infeasible"});
    else table.skipped.push_back({cells[k].first, cells[k].second, "solver-failed"});
  }
  return table;
}

std::vector<PhasePoint> scan_path(const std::vector<std::pair<double, double>>& cells,
                                  const solver::SolveConfig& config, int threads) {
  std::vector<PhasePoint> pts(cells.size());
  parallel_for_index(cells.size(), threads, [&](std::size_t k) {
    pts[k] = evaluate_cell(cells[k].first, cells[k].second, config);
  });
  return pts;
}

std::vector<TransitionFlag> detect_transition(const std::vector<PhasePoint>& path, double kappa) {
  if (path.size() < 5) throw DomainError("detect_transition: path needs at least 5 points");
  std::size_t n = path.size();
  std::vector<double> d2(n, 0.0);
  std::vector<double> sorted;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    d2[i] = std::abs(path[i - 1].s - 2.0 * path[i].s + path[i + 1].s);
    sorted.push_back(d2[i]);
  }
  std::sort(sorted.begin(), sorted.end());
  double median = sorted[sorted.size() / 2];
  std::vector<TransitionFlag> flags;
  for (std::size_t i = 0; i < n; ++i) {
    bool branch = i > 0 && path[i].branch != path[i - 1].branch;
    bool spike = i > 0 && i + 1 < n && d2[i] > kappa * median && d2[i] > 1e-9;
    if (!branch && !spike) continue;
    TransitionFlag f;
    f.index = static_cast<int>(i);
    // Branch changes sit between samples i-1 and i; report the midpoint.
    f.e = branch ? 0.5 * (path[i - 1].e + path[i].e) : path[i].e;
    f.t = branch ? 0.5 * (path[i - 1].t + path[i].t) : path[i].t;
    f.branch_change = branch;
    f.second_difference = spike;
    f.ratio = median > 0.0 ? d2[i] / median : 0.0;
    flags.push_back(f);
  }
  return flags;
}

LegendreResult legendre(const std::vector<PhasePoint>& points, double beta1, double beta2) {
  if (points.empty()) throw DomainError("legendre: empty scan");
  const PhasePoint* arg = &points.front();
  double best = -1e300;
  for (const PhasePoint& p : points) {
    double v = p.s + beta1 * p.e + beta2 * p.t;
    if (v > best) {
      best = v;
      arg = &p;
    }
  }
  return {best, arg->e, arg->t, arg->s};
}

namespace {

std::vector<double> grid_with_cusps(double step, double lo, double hi) {
  std::vector<double> xs;
  long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) {
    double x = lo + i * step;
    if (x > hi - 1e-12) x = hi;  // snap accumulated rounding onto the endpoint
    xs.push_back(x);
  }
  if (xs.empty() || xs.back() != hi) xs.push_back(hi);
  for (int k = 1; k <= 50; ++k) {
    double cusp = static_cast<double>(k) / (k + 1.0);
    if (cusp > lo && cusp < hi) xs.push_back(cusp);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }),
           xs.end());
  return xs;
}

std::string num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

void emit_region(std::ostream& os, double step) {
  os << "e,t_lower,t_upper,transition_scallop,transition_upper\n";
  for (double e : grid_with_cusps(step, 0.0, 1.0)) {
    double lower = e >= 1.0 ? 1.0 : boundary::min_triangle(e);
    os << num(e) << "," << num(lower) << "," << num(boundary::max_triangle(e)) << ",";
    if (e >= 0.5) os << num(boundary::transition_curve_scallop(e));
    os << ",";
    if (e > 0.0 && e < 0.5) os << num(boundary::transition_curve_upper(e));
    os << "\n";
  }
}

void emit_boundary_curves(std::ostream& os, double step) {
  os << "e,t,curve_tag\n";
  for (double e : grid_with_cusps(step, 0.0, 1.0))
    os << num(e) << "," << num(boundary::max_triangle(e)) << ",upper\n";
  for (double e : grid_with_cusps(step, 0.0, 0.5)) os << num(e) << ",0,lower-flat\n";
  for (double e : grid_with_cusps(step, 0.5, 1.0)) {
    double t = e <= 0.5 ? 0.0 : (e >= 1.0 ? 1.0 : boundary::min_triangle(e));
    os << num(e) << "," << num(t) << ",lower-scallop\n";
  }
  for (double e : grid_with_cusps(step, 0.5, 1.0))
    os << num(e) << "," << num(boundary::transition_curve_scallop(e)) << ",transition-scallop\n";
  for (double e : grid_with_cusps(step, 0.0, 0.5)) {
    if (e <= 0.0 || e >= 0.5) continue;
    os << num(e) << "," << num(boundary::transition_curve_upper(e)) << ",transition-upper\n";
  }
}

}  // namespace graphon_lab::phase
