#ifndef GRAPHON_LAB_PHASE_HPP
#define GRAPHON_LAB_PHASE_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "graphon_lab/solver.hpp"
#include "graphon_lab/step_graphon.hpp"

namespace graphon_lab::phase {

// One solved grid cell. `branch` is bipartite-perturbative, scallop-<ell>,
// constant, or numeric-other; `branch_distance` is the reduced-graphon
// distance to the tagged (or nearest) analytic candidate.
struct PhasePoint {
  double e = 0.0, t = 0.0;
  double s = 0.0;  // entropy = -min I; always in [0, ln2/2]
  std::string branch = "numeric-other";
  double branch_distance = -1.0;
  // Digest of the canonicalized optimizer: its distinct cell values
  // (quantized at 1e-4, at most 16 kept).
  std::vector<double> opt_values;
  double el_residual = 0.0;
  bool converged = false;
};

struct GridSpec {
  double e_min, e_max;
  int e_steps;
  double t_min, t_max;
  int t_steps;
};

struct SkippedCell {
  double e, t;
  std::string reason;
};

struct ScanTable {
  GridSpec grid;
  solver::SolveConfig config;
  std::vector<PhasePoint> points;
  std::vector<SkippedCell> skipped;
};

PhasePoint evaluate_cell(double e, double t, const solver::SolveConfig& config);

// Grid sweep; infeasible cells become skip records, solver failures become
// diagnostics on the cell, the scan itself never aborts. Deterministic given
// (grid, config); cells are independent tasks merged by index.
ScanTable scan(const GridSpec& grid, const solver::SolveConfig& config, int threads = 1);
std::vector<PhasePoint> scan_path(const std::vector<std::pair<double, double>>& cells,
                                  const solver::SolveConfig& config, int threads = 1);

struct TransitionFlag {
  int index;  // position along the path
  double e, t;
  bool branch_change;
  bool second_difference;
  double ratio;  // second difference over the path median
};

// Flags branch-tag changes and second-difference spikes (threshold kappa
// times the path median) along a solved path. Both criteria are recorded
// separately. Paths shorter than 5 points are rejected.
std::vector<TransitionFlag> detect_transition(const std::vector<PhasePoint>& path,
                                              double kappa = 20.0);

struct LegendreResult {
  double value;
  double e, t, s;  // argmax cell
};

// Grid approximation of the free energy: psi(b1,b2) = max over scanned cells
// of s + b1 e + b2 t. The sign convention is fixed here and recorded in CLI
// output metadata.
LegendreResult legendre(const std::vector<PhasePoint>& points, double beta1, double beta2);

// Wide CSV: e, t_lower, t_upper, transition curves where defined. Cusp rows
// are appended exactly even when off-grid.
void emit_region(std::ostream& os, double step);
// Long CSV (e, t, curve_tag) of the three boundary curves and both
// transition curves.
void emit_boundary_curves(std::ostream& os, double step);

}  // namespace graphon_lab::phase

#endif
