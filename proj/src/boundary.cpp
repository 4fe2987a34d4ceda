#include "graphon_lab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"

namespace graphon_lab::boundary {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

StepGraphon bipartite_optimizer(double e) {
  if (!(e >= 0.0 && e <= 0.5))
    throw DomainError("bipartite_optimizer: e must lie in [0, 1/2], got " + fmt(e));
  double v = 2.0 * e;
  return StepGraphon({0.0, 0.5, 1.0}, {{0.0, v}, {v, 0.0}});
}

ScallopParams scallop_params(double e) {
  if (!(e > 0.5 && e < 1.0))
    throw DomainError("scallop_params: e must lie in (1/2, 1), got " + fmt(e));
  // Smallest ell with e <= 1 - 1/(ell+1); at cusps both neighbours build the
  // same graphon and we keep the smaller ell.
  double raw = 1.0 / (1.0 - e) - 1.0;
  if (raw > 1e7) throw ResourceError("scallop_params: e too close to 1 (parts > 1e7)");
  int ell = static_cast<int>(std::ceil(raw - 1e-9));
  ell = std::max(ell, 2);
  double arg = ell * (ell - e * (ell + 1.0));
  if (arg < -1e-12) {
    ++ell;  // left-endpoint tie where the smaller ell has no real sqrt
    arg = ell * (ell - e * (ell + 1.0));
  }
  // At a cusp the sqrt argument vanishes; snap away the double-rounding dust
  // so the construction is exact there.
  if (std::abs(arg) < 1e-12) arg = 0.0;
  double c = (ell + std::sqrt(arg)) / (static_cast<double>(ell) * (ell + 1.0));
  double last = 1.0 - (ell - 1.0) * c;
  double p = 4.0 * c * (1.0 - ell * c) / (last * last);
  p = std::min(1.0, std::max(0.0, p));
  return ScallopParams{ell, c, p, e};
}

StepGraphon scallop_optimizer(double e) {
  ScallopParams sp = scallop_params(e);
  int ell = sp.ell;
  if (ell > 4096) throw ResourceError("scallop_optimizer: too many parts to materialize");
  double c = sp.c;
  std::size_t m = static_cast<std::size_t>(ell) + 1;  // ell-1 parts + split last part
  std::vector<double> bounds(m + 1);
  bounds[0] = 0.0;
  for (int k = 1; k < ell; ++k) bounds[k] = k * c;
  bounds[ell] = (1.0 + (ell - 1.0) * c) / 2.0;  // midpoint of the last part
  bounds[m] = 1.0;
  std::vector<std::vector<double>> vals(m, std::vector<double>(m, 1.0));
  for (int k = 0; k < ell - 1; ++k) vals[k][k] = 0.0;
  // Last part [ (ell-1)c, 1 ] holds a balanced bipartite block with value p.
  std::size_t a = m - 2, b = m - 1;
  vals[a][a] = vals[b][b] = 0.0;
  vals[a][b] = vals[b][a] = sp.p;
  return StepGraphon(std::move(bounds), std::move(vals));
}

double max_triangle(double e) {
  if (!(e >= 0.0 && e <= 1.0)) throw DomainError("max_triangle: e must lie in [0,1]");
  return std::pow(e, 1.5);
}

double min_triangle(double e) {
  if (!(e >= 0.0 && e < 1.0)) throw DomainError("min_triangle: e must lie in [0,1)");
  if (e <= 0.5) return 0.0;
  ScallopParams sp = scallop_params(e);
  if (sp.ell <= 64) return triangle_density(scallop_optimizer(e));
  // Closed form of the same block sum, for scallops too fine to materialize:
  // ordered triples across distinct full parts, across two parts and one half
  // of the last part, and across one part plus the bipartite corner.
  double ell = sp.ell, c = sp.c;
  double d = (1.0 - (ell - 1.0) * c) / 2.0;
  double t = 0.0;
  if (sp.ell >= 4) t += (ell - 1.0) * (ell - 2.0) * (ell - 3.0) * c * c * c;
  t += 6.0 * (ell - 1.0) * (ell - 2.0) * c * c * d;
  t += 6.0 * (ell - 1.0) * c * d * d * sp.p;
  return t;
}

bool feasible(double e, double t, double tol) {
  if (e < -tol || e > 1.0 + tol) return false;
  double ec = std::min(1.0, std::max(0.0, e));
  double lo = (ec >= 1.0 - 1e-12) ? 1.0 : min_triangle(ec);
  double hi = max_triangle(ec);
  return t >= lo - tol && t <= hi + tol;
}

StepGraphon perturbative_optimizer(double e, double eps) {
  if (!(e > 0.0 && e < 1.0)) throw DomainError("perturbative_optimizer: e must lie in (0,1)");
  if (!(eps >= 0.0 && eps <= 2.0 * e))
    throw DomainError("perturbative_optimizer: eps must lie in [0, 2e]");
  double cross = 2.0 * e - eps;
  if (cross > 1.0 + 1e-15)
    throw DomainError("perturbative_optimizer: 2e - eps exceeds 1");
  cross = std::min(1.0, cross);
  if (eps > 1.0) throw DomainError("perturbative_optimizer: eps exceeds 1");
  return StepGraphon({0.0, 0.5, 1.0}, {{eps, cross}, {cross, eps}});
}

double perturbative_entropy(double e, double eps) {
  StepGraphon g = perturbative_optimizer(e, eps);  // validates the domain
  (void)g;
  return -0.5 * (rate_pointwise(eps) + rate_pointwise(2.0 * e - eps));
}

double eps_from_t(double e, double t) {
  if (!(e > 0.0 && e < 1.0)) throw DomainError("eps_from_t: e must lie in (0,1)");
  double tmax = 2.0 * e * e * e;
  if (t < -1e-15 || t > tmax + 1e-15)
    throw DomainError("eps_from_t: t must lie in [0, 2e^3], got " + fmt(t));
  t = std::min(tmax, std::max(0.0, t));
  double eps = e - std::cbrt(e * e * e - t);
  // One Newton polish on e^3 - (e-eps)^3 - t (derivative 3(e-eps)^2).
  double r = e * e * e - std::pow(e - eps, 3) - t;
  double d = 3.0 * (e - eps) * (e - eps);
  if (d > 1e-30) eps -= r / d;
  eps = std::min(2.0 * e, std::max(0.0, eps));
  if (2.0 * e - eps > 1.0 + 1e-12)
    throw DomainError("eps_from_t: resulting family leaves [0,1] (2e - eps > 1)");
  return eps;
}

double transition_curve_scallop(double e) {
  if (!(e >= 0.5 && e <= 1.0))
    throw DomainError("transition_curve_scallop: e must lie in [1/2, 1]");
  double u = 2.0 * e - 1.0;
  return (u * u * u + 3.0 * u) / 4.0;
}

double transition_curve_upper(double e) {
  if (!(e > 0.0 && e < 0.5))
    throw DomainError("transition_curve_upper: e must lie in (0, 1/2)");
  return 2.0 * e * e * e;
}

double lambda2_analytic(double e, double eps) {
  if (!(eps > 0.0 && eps < 2.0 * e))
    throw DomainError("lambda2_analytic: eps must lie in (0, 2e)");
  double d = e - eps;
  if (std::abs(d) < 1e-12)
    throw DomainError("lambda2_analytic: singular parameter eps = e");
  return (rate_pointwise_d1(2.0 * e - eps) - rate_pointwise_d1(eps)) / (6.0 * d * d);
}

std::pair<double, double> perturbative_multipliers(double e, double eps) {
  double l2 = lambda2_analytic(e, eps);
  // Stationarity on the cross cells: I0'(2e-eps) + l1 + 3 l2 h12 = 0 with
  // h12 = eps (2e-eps).
  double l1 = -rate_pointwise_d1(2.0 * e - eps) - 3.0 * l2 * eps * (2.0 * e - eps);
  return {l1, l2};
}

VariationCoefficients perturbative_coefficients(double e, double eps) {
  double d = e - eps;
  double a = (rate_pointwise_d1(2.0 * e - eps) - rate_pointwise_d1(eps)) / (2.0 * d * d);
  return {0.5 * rate_pointwise_d2(eps) + eps * a,
          0.5 * rate_pointwise_d2(2.0 * e - eps) + eps * a,
          (2.0 * e - eps) * a};
}

PerturbativeParams PerturbativeParams::from_eps(double e, double eps) {
  PerturbativeParams p;
  p.e = e;
  p.eps = eps;
  p.t = e * e * e - std::pow(e - eps, 3);
  p.s = perturbative_entropy(e, eps);
  return p;
}

PerturbativeParams PerturbativeParams::from_t(double e, double t) {
  return from_eps(e, eps_from_t(e, t));
}

namespace {

struct AsymState {
  double p, alpha, beta;
};

// Residuals of the three defining equations for the g_c family: edge density,
// triangle density, and stationarity expressed as a 3x3 determinant (the
// multiplier pair (l1, l2) exists iff the I0' vector lies in the span of
// {1, 3h} over the three distinct cells).
void asym_residual(double c, double e, double t, const AsymState& x, double out[3]) {
  double w1 = c, w2 = 1.0 - c;
  double p = x.p, a = x.alpha, b = x.beta;
  out[0] = w1 * w1 * a + w2 * w2 * b + 2.0 * w1 * w2 * p - e;
  out[1] = w1 * w1 * w1 * a * a * a + w2 * w2 * w2 * b * b * b +
           3.0 * w1 * w1 * w2 * a * p * p + 3.0 * w1 * w2 * w2 * b * p * p - t;
  double h11 = w1 * a * a + w2 * p * p;
  double h22 = w1 * p * p + w2 * b * b;
  double h12 = p * (w1 * a + w2 * b);
  double ia = rate_pointwise_d1(a), ib = rate_pointwise_d1(b), ip = rate_pointwise_d1(p);
  out[2] = ia * (h22 - h12) - ib * (h11 - h12) + ip * (h11 - h22);
  out[2] *= 3.0;
}

double max_abs3(const double r[3]) {
  return std::max(std::abs(r[0]), std::max(std::abs(r[1]), std::abs(r[2])));
}

}  // namespace

AsymmetricSolve solve_asymmetric(double c, double e, double t) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("solve_asymmetric: c must lie in (0,1)");
  if (!(e > 0.0 && e < 0.5)) throw DomainError("solve_asymmetric: e must lie in (0, 1/2)");
  double guard = 2.0 * e * e * e;
  if (t < 0.0 || t > guard) throw DomainError("solve_asymmetric: t outside [0, 2e^3]");

  double w1 = c, w2 = 1.0 - c;
  if (t <= 1e-14) {
    // Boundary family: alpha = beta = 0 kills every triangle term; the cross
    // value is pinned by the edge density alone.
    double p = e / (2.0 * w1 * w2);
    if (p > 1.0) throw DomainError("solve_asymmetric: no bipartite solution at this c");
    StepGraphon g({0.0, c, 1.0}, {{0.0, p}, {p, 0.0}});
    return {p, 0.0, 0.0, g, 0, 0.0};
  }

  double eps0 = eps_from_t(e, t);
  AsymState x{2.0 * e - eps0, eps0, eps0};
  double r[3];
  asym_residual(c, e, t, x, r);
  int it = 0;
  const int max_it = 200;
  const double tol = 1e-11;
  while (max_abs3(r) > tol && it < max_it) {
    ++it;
    // Finite-difference Jacobian; the system is tiny and smooth.
    double J[3][3];
    const double hstep = 1e-7;
    double* fields[3] = {&x.p, &x.alpha, &x.beta};
    for (int k = 0; k < 3; ++k) {
      double save = *fields[k];
      double rp[3], rm[3];
      *fields[k] = save + hstep;
      asym_residual(c, e, t, x, rp);
      *fields[k] = save - hstep;
      asym_residual(c, e, t, x, rm);
      *fields[k] = save;
      for (int row = 0; row < 3; ++row) J[row][k] = (rp[row] - rm[row]) / (2.0 * hstep);
    }
    // Solve J dx = -r by Gaussian elimination with partial pivoting.
    double A[3][4];
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) A[row][col] = J[row][col];
      A[row][3] = -r[row];
    }
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int row = col + 1; row < 3; ++row)
        if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
      for (int k = 0; k < 4; ++k) std::swap(A[col][k], A[piv][k]);
      if (std::abs(A[col][col]) < 1e-300)
        throw ConvergenceError("solve_asymmetric: singular Jacobian at p=" + fmt(x.p) +
                               " alpha=" + fmt(x.alpha) + " beta=" + fmt(x.beta));
      for (int row = col + 1; row < 3; ++row) {
        double f = A[row][col] / A[col][col];
        for (int k = col; k < 4; ++k) A[row][k] -= f * A[col][k];
      }
    }
    double dx[3];
    for (int row = 2; row >= 0; --row) {
      double s = A[row][3];
      for (int k = row + 1; k < 3; ++k) s -= A[row][k] * dx[k];
      dx[row] = s / A[row][row];
    }
    // Damping: stay inside (0,1)^3 and require residual decrease.
    double lam = 1.0;
    double base = max_abs3(r);
    AsymState best = x;
    bool moved = false;
    while (lam > 1e-10) {
      AsymState trial{x.p + lam * dx[0], x.alpha + lam * dx[1], x.beta + lam * dx[2]};
      if (trial.p > 0.0 && trial.p < 1.0 && trial.alpha > 0.0 && trial.alpha < 1.0 &&
          trial.beta > 0.0 && trial.beta < 1.0) {
        double rt[3];
        asym_residual(c, e, t, trial, rt);
        if (max_abs3(rt) < base) {
          best = trial;
          moved = true;
          break;
        }
      }
      lam *= 0.5;
    }
    if (!moved)
      throw ConvergenceError("solve_asymmetric: stalled at p=" + fmt(x.p) + " alpha=" +
                             fmt(x.alpha) + " beta=" + fmt(x.beta) + " residual=" + fmt(base));
    x = best;
    asym_residual(c, e, t, x, r);
  }
  if (max_abs3(r) > tol)
    throw ConvergenceError("solve_asymmetric: no convergence after " + std::to_string(it) +
                           " iterations; last iterate p=" + fmt(x.p) + " alpha=" + fmt(x.alpha) +
                           " beta=" + fmt(x.beta) + " residual=" + fmt(max_abs3(r)));
  StepGraphon g({0.0, c, 1.0}, {{x.alpha, x.p}, {x.p, x.beta}});
  return {x.p, x.alpha, x.beta, g, it, max_abs3(r)};
}

StepGraphon asymmetric_family(double c, double e, double t) {
  return solve_asymmetric(c, e, t).graphon;
}

CurvatureEstimate second_derivative_in_c(double e, double t) {
  double guard = 2.0 * e * e * e / 4.0;
  if (t > guard)
    throw DomainError("second_derivative_in_c: t above the 2e^3/4 guard");
  auto value = [&](double c) { return rate(solve_asymmetric(c, e, t).graphon); };
  double f0 = value(0.5);
  auto central = [&](double h) {
    return (value(0.5 + h) - 2.0 * f0 + value(0.5 - h)) / (h * h);
  };
  double h = 1e-3;
  double d_h = central(h);
  double d_h2 = central(0.5 * h);
  double rich = (4.0 * d_h2 - d_h) / 3.0;
  return {rich, std::abs(rich - d_h2)};
}

}  // namespace graphon_lab::boundary
