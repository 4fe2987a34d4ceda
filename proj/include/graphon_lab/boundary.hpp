#ifndef GRAPHON_LAB_BOUNDARY_HPP
#define GRAPHON_LAB_BOUNDARY_HPP

#include <utility>

#include "graphon_lab/step_graphon.hpp"

namespace graphon_lab::boundary {

// Parameters of the minimizing multipartite structure for e in the ell-th
// scallop: ell parts, the first ell-1 of width c, the last bipartite with
// corner value p.
struct ScallopParams {
  int ell;
  double c;
  double p;
  double e;
};

// One member of the two-block family near the first scallop: intra-part value
// eps, cross value 2e-eps, with its implied triangle density and entropy.
struct PerturbativeParams {
  double e;
  double eps;
  double t;  // e^3 - (e-eps)^3
  double s;  // -[I0(eps) + I0(2e-eps)] / 2
  static PerturbativeParams from_eps(double e, double eps);
  static PerturbativeParams from_t(double e, double t);
};

// Two half-blocks, value 2e off the diagonal, zero on it. e in [0, 1/2].
StepGraphon bipartite_optimizer(double e);

// Scallop data for e in (1/2, 1). At a cusp e_k = k/(k+1) the smaller ell is
// chosen; both adjacent constructions agree there.
ScallopParams scallop_params(double e);
StepGraphon scallop_optimizer(double e);

double min_triangle(double e);   // lower boundary of the feasible region
double max_triangle(double e);   // e^(3/2)
bool feasible(double e, double t, double tol = 1e-12);

// Two half-blocks, eps on the diagonal blocks, 2e-eps off. Valid whenever
// 0 <= eps <= 2e and 2e-eps <= 1; this covers e >= 1/2 up to the point where
// the cross value saturates at 1 (the family the transition curves live on).
StepGraphon perturbative_optimizer(double e, double eps);
double perturbative_entropy(double e, double eps);

// Unique eps in [max(0,2e-1), 2e] with e^3 - (e-eps)^3 = t.
double eps_from_t(double e, double t);

double transition_curve_scallop(double e);  // [(2e-1)^3 + 3(2e-1)] / 4, e in [1/2,1]
double transition_curve_upper(double e);    // 2 e^3, e in (0, 1/2)

// Multiplier of the triangle constraint for the perturbative family:
// lambda2 = [I0'(2e-eps) - I0'(eps)] / (6 (e-eps)^2). Singular at eps = e.
double lambda2_analytic(double e, double eps);
// (lambda1, lambda2) making the family a stationary point.
std::pair<double, double> perturbative_multipliers(double e, double eps);

// Coefficients of the quadratic form controlling the second-variation bound.
struct VariationCoefficients {
  double c1, c2, c3;
};
VariationCoefficients perturbative_coefficients(double e, double eps);

// The g_c family: blocks [0,c],[c,1], values alpha/beta on the diagonal
// blocks and p across, solving {edge density = e, triangle density = t,
// stationarity} by damped Newton. At c = 1/2 this is the perturbative
// optimizer.
struct AsymmetricSolve {
  double p, alpha, beta;
  StepGraphon graphon;
  int iterations;
  double residual;
};
AsymmetricSolve solve_asymmetric(double c, double e, double t);
StepGraphon asymmetric_family(double c, double e, double t);

// Central finite-difference estimate (h = 1e-3, Richardson refined) of
// d^2 I(g_c)/dc^2 at c = 1/2, with an error estimate.
struct CurvatureEstimate {
  double value;
  double error;
};
CurvatureEstimate second_derivative_in_c(double e, double t);

}  // namespace graphon_lab::boundary

#endif
