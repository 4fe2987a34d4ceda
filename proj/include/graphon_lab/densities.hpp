#ifndef GRAPHON_LAB_DENSITIES_HPP
#define GRAPHON_LAB_DENSITIES_HPP

#include <vector>

#include "graphon_lab/simple_graph.hpp"
#include "graphon_lab/step_graphon.hpp"

namespace graphon_lab {

// n equal-width blocks; value 1 exactly on cells that are edges of G.
StepGraphon checkerboard(const SimpleGraph& g);

// Block-exact integrals; no quadrature anywhere.
double edge_density(const StepGraphon& g);
double triangle_density(const StepGraphon& g);

// Homomorphism density t(H,g): sum over assignments of H's vertices to
// blocks, weighted by block widths. Guarded at 1e9 terms (m^|V(H)|).
double hom_density(const Motif& h, const StepGraphon& g);

// Pointwise rate: I0(u) = [u ln u + (1-u) ln(1-u)] / 2, extended by
// continuity with I0(0) = I0(1) = 0. Derivatives are clamped by evaluating at
// u in [1e-12, 1-1e-12] so boundary-active cells give large finite values
// rather than infinities.
double rate_pointwise(double u);
double rate_pointwise_d1(double u);
double rate_pointwise_d2(double u);

double rate(const StepGraphon& g);

// h(x,y) = Int g(x,z) g(y,z) dz on the same partition.
StepGraphon aux_h(const StepGraphon& g);

struct CutDistance {
  double value;
  bool exact;  // false: alternating-maximization lower bound (refined m > 20)
};

// Labeled cut distance sup_{S,T} |Int_{SxT} (f-g)|. Exact by 2^m subset
// enumeration with the analytically optimal T per S when the common
// refinement has at most 20 blocks; multistart alternating maximization
// (flagged as a lower bound) beyond that.
CutDistance cut_distance_labeled(const StepGraphon& f, const StepGraphon& g);

// Truncated hom pseudometric: sum_j 2^-j |t(H_j,f) - t(H_j,g)| over the given
// list (j starts at 1).
double hom_metric(const StepGraphon& f, const StepGraphon& g, const std::vector<Motif>& family);

}  // namespace graphon_lab

#endif
