#ifndef GRAPHON_LAB_SOLVER_HPP
#define GRAPHON_LAB_SOLVER_HPP

#include <cstdint>
#include <vector>

#include "graphon_lab/step_graphon.hpp"

namespace graphon_lab::solver {

struct SolveConfig {
  std::size_t m = 16;       // equal-width grid size
  int starts = 8;           // multistart count
  std::uint64_t seed = 1;
  // The penalty must dominate the rate term's pull from the first subproblem
  // on: weaker values let every start collapse onto the constant manifold,
  // which the gradient flow cannot leave.
  double mu_initial = 1000.0;
  double mu_growth = 5.0;
  double mu_cap = 1e8;
  double tol_constraint = 1e-8;
  double tol_gradient = 1e-7;
  int max_outer = 40;
  int max_inner = 800;
  int threads = 1;
};

struct SolveResult {
  StepGraphon graphon;
  double value;             // I(g) at the returned point
  double lambda1, lambda2;  // least-squares fit over interior cells
  double el_residual_sup;
  double residual_edge, residual_triangle;
  bool converged;
  int start_index;          // which multistart won
  bool on_boundary;         // (e,t) within 1e-9 of the feasible boundary
  int outer_iterations;
};

// Best-of-multistarts local minimizer of the rate function over symmetric
// m x m step graphons with the two density constraints. Augmented-Lagrangian
// outer loop, monotone projected-gradient (Barzilai-Borwein) inner loop, box
// projection onto [0,1]. Starts: constant graphon, applicable analytic
// candidates resampled to the grid, then seeded random matrices.
SolveResult minimize_rate(double e, double t, const SolveConfig& config);

// sup over interior cells (value in (1e-6, 1-1e-6)) of
// |I0'(g_ij) + lambda1 + 3 lambda2 h_ij|. Boundary-active cells are excluded:
// there the stationarity condition is an inequality.
double el_residual(const StepGraphon& g, double lambda1, double lambda2);

// Second-order change of the rate along a block perturbation at fixed (e,t):
// 3 lambda2 Int g dg dg + 1/2 Int I0''(g) dg^2, block-exact. `delta` must be
// symmetric with one row per block of g (values may be negative).
double second_variation(const StepGraphon& g, const std::vector<std::vector<double>>& delta,
                        double lambda2);

// Remove the first-order edge and triangle components from a symmetric block
// perturbation (w-weighted Gram-Schmidt against 1 and aux_h(g)).
std::vector<std::vector<double>> project_constraint_tangent(
    const StepGraphon& g, std::vector<std::vector<double>> delta);

// Deterministic block ordering: sort by quantized degree, then width, then
// links to already-placed blocks, then the sorted remaining-link profile.
// Idempotent; rate and densities are invariant. A heuristic proxy for
// reduced-graphon comparison: exact ties beyond these keys keep input order.
StepGraphon canonicalize(const StepGraphon& g);

// Heuristic upper bound on the reduced-graphon L1 distance. Equal block
// counts: L1 on the common refinement after canonicalization (plus small
// tie-group permutations). Different block counts: the finer graphon's blocks
// are assigned to the coarser partition by local-search alignment and block
// averaging before the L1 is taken.
double compare_reduced(const StepGraphon& f, const StepGraphon& g);

namespace detail {
// True partials treating all m^2 entries as independent (symmetry doubles
// off-diagonal sensitivities when perturbing symmetric pairs).
std::vector<double> rate_gradient(const StepGraphon& g);
std::vector<double> triangle_gradient(const StepGraphon& g);
}  // namespace detail

}  // namespace graphon_lab::solver

#endif
