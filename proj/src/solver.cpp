#include "graphon_lab/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "graphon_lab/boundary.hpp"
#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/util.hpp"

namespace graphon_lab::solver {

namespace {

constexpr double kInteriorLo = 1e-6;
constexpr double kInteriorHi = 1.0 - 1e-6;

struct Work {
  std::size_t m;
  double w;                  // 1/m
  std::vector<double> g;     // m*m, symmetric
  std::vector<double> h;     // m*m, h_ij = w * sum_k g_ik g_jk
  double e_val = 0.0, t_val = 0.0, rate_val = 0.0;

  explicit Work(std::size_t m_) : m(m_), w(1.0 / static_cast<double>(m_)), g(m_ * m_, 0.0), h(m_ * m_, 0.0) {}

  void refresh() {
    const std::size_t mm = m;
    for (std::size_t i = 0; i < mm; ++i)
      for (std::size_t j = i; j < mm; ++j) {
        double s = 0.0;
        const double* gi = &g[i * mm];
        const double* gj = &g[j * mm];
        for (std::size_t k = 0; k < mm; ++k) s += gi[k] * gj[k];
        h[i * mm + j] = h[j * mm + i] = w * s;
      }
    double es = 0.0, ts = 0.0, rs = 0.0;
    for (std::size_t i = 0; i < mm; ++i)
      for (std::size_t j = 0; j < mm; ++j) {
        es += g[i * mm + j];
        ts += g[i * mm + j] * h[i * mm + j];
        rs += rate_pointwise(g[i * mm + j]);
      }
    e_val = es * w * w;
    t_val = ts * w * w;
    rate_val = rs * w * w;
  }
};

struct StartOutcome {
  std::vector<double> g;
  double value = std::numeric_limits<double>::infinity();
  double ce = 0.0, ct = 0.0;
  double lambda1 = 0.0, lambda2 = 0.0;  // augmented-Lagrangian estimates
  bool converged = false;
  int outer = 0;
};

// Monotone projected Barzilai-Borwein descent on the augmented Lagrangian.
// Returns the sup-norm projected-gradient residual (density scale).
double inner_solve(Work& wk, double e_t, double t_t, double l1, double l2, double mu,
                   double tol, int max_inner) {
  const std::size_t m = wk.m, mm = m * m;
  const double w2 = wk.w * wk.w;
  auto merit = [&]() {
    double ce = wk.e_val - e_t, ct = wk.t_val - t_t;
    return wk.rate_val + l1 * ce + l2 * ct + 0.5 * mu * (ce * ce + ct * ct);
  };
  // Density-scale gradient: I0'(g) + a + 3 b h with the penalty folded into
  // the effective multipliers.
  std::vector<double> grad(mm), g_old(mm), grad_old(mm), trial(mm), precond(mm);
  auto compute_grad = [&]() {
    double a = l1 + mu * (wk.e_val - e_t);
    double b = l2 + mu * (wk.t_val - t_t);
    for (std::size_t k = 0; k < mm; ++k) {
      grad[k] = rate_pointwise_d1(wk.g[k]) + a + 3.0 * b * wk.h[k];
      // Diagonal curvature scaling: cells close to the box face carry
      // I0'' up to ~1/clamp, which would otherwise force a tiny global step.
      precond[k] = std::max(2.0, rate_pointwise_d2(wk.g[k]));
    }
  };
  auto pg_residual = [&]() {
    double r = 0.0;
    for (std::size_t k = 0; k < mm; ++k) {
      double p = std::min(1.0, std::max(0.0, wk.g[k] - grad[k]));
      r = std::max(r, std::abs(p - wk.g[k]));
    }
    return r;
  };

  wk.refresh();
  compute_grad();
  double f = merit();
  double alpha = 1.0;
  double res = pg_residual();
  for (int it = 0; it < max_inner && res > tol; ++it) {
    g_old = wk.g;
    grad_old = grad;
    // Projected scaled-BB trial direction (separable box, so the clamp is
    // the projection in the diagonal metric as well).
    for (std::size_t k = 0; k < mm; ++k)
      trial[k] =
          std::min(1.0, std::max(0.0, g_old[k] - alpha * grad[k] / precond[k])) - g_old[k];
    double dir_deriv = 0.0;
    for (std::size_t k = 0; k < mm; ++k) dir_deriv += grad[k] * trial[k];
    dir_deriv *= w2;  // true directional derivative
    if (dir_deriv > -1e-300) break;  // stationary up to rounding
    double step = 1.0;
    double f_new = f;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t k = 0; k < mm; ++k) wk.g[k] = g_old[k] + step * trial[k];
      wk.refresh();
      f_new = merit();
      if (f_new <= f + 1e-4 * step * dir_deriv) break;
      step *= 0.5;
    }
    if (f_new > f + 1e-12 * std::max(1.0, std::abs(f))) {
      // No descent step found; restore and stop with a fresh residual.
      wk.g = g_old;
      wk.refresh();
      res = pg_residual();
      break;
    }
    assert(f_new <= f + 1e-12 * std::max(1.0, std::abs(f)) && "merit must not increase");
    f = f_new;
    std::vector<double> precond_old = precond;
    compute_grad();
    // BB step length from the accepted move, in the scaled metric.
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < mm; ++k) {
      double s = wk.g[k] - g_old[k];
      double y = grad[k] / precond[k] - grad_old[k] / precond_old[k];
      ss += s * s;
      sy += s * y;
    }
    alpha = (sy > 1e-300) ? std::min(1e8, std::max(1e-10, ss / sy)) : 1.0;
    res = pg_residual();
  }
  return res;
}

// Projected descent on the squared constraint violation alone. Run before
// the augmented-Lagrangian loop: the early subproblems are dominated by the
// rate term, which flattens any start onto the constant manifold (an
// invariant set of the gradient flow); moving to the constraint set first
// preserves the start's structure.
void pre_project(Work& wk, double e_t, double t_t, int max_iter) {
  const std::size_t mm = wk.m * wk.m;
  const double w2 = wk.w * wk.w;
  std::vector<double> grad(mm), trial(mm);
  auto phi = [&]() {
    double ce = wk.e_val - e_t, ct = wk.t_val - t_t;
    return 0.5 * (ce * ce + ct * ct);
  };
  wk.refresh();
  double f = phi();
  double alpha = 1.0;
  std::vector<double> g_old(mm), grad_old(mm);
  auto compute_grad = [&]() {
    double ce = wk.e_val - e_t, ct = wk.t_val - t_t;
    for (std::size_t k = 0; k < mm; ++k) grad[k] = ce + 3.0 * ct * wk.h[k];
  };
  compute_grad();
  for (int it = 0; it < max_iter && f > 1e-16; ++it) {
    g_old = wk.g;
    grad_old = grad;
    for (std::size_t k = 0; k < mm; ++k)
      trial[k] = std::min(1.0, std::max(0.0, g_old[k] - alpha * grad[k])) - g_old[k];
    double dir = 0.0;
    for (std::size_t k = 0; k < mm; ++k) dir += grad[k] * trial[k];
    dir *= w2;
    if (dir > -1e-300) break;
    double step = 1.0, f_new = f;
    for (int ls = 0; ls < 50; ++ls) {
      for (std::size_t k = 0; k < mm; ++k) wk.g[k] = g_old[k] + step * trial[k];
      wk.refresh();
      f_new = phi();
      if (f_new <= f + 1e-4 * step * dir) break;
      step *= 0.5;
    }
    if (f_new > f) {
      wk.g = g_old;
      wk.refresh();
      break;
    }
    f = f_new;
    compute_grad();
    double ss = 0.0, sy = 0.0;
    for (std::size_t k = 0; k < mm; ++k) {
      double s = wk.g[k] - g_old[k], y = grad[k] - grad_old[k];
      ss += s * s;
      sy += s * y;
    }
    alpha = (sy > 1e-300) ? std::min(1e8, std::max(1e-10, ss / sy)) : 1.0;
  }
}

// Warm multiplier estimates at the working iterate: least squares of the
// stationarity condition over interior cells. When every interior cell sees
// the same h (degenerate fit), lambda2 is instead chosen to satisfy the
// pinned-cell inequalities: cells at the bottom face need a nonnegative
// gradient, cells at the top face a nonpositive one, otherwise the first
// subproblem immediately dismantles the start's structure.
void warm_multipliers(const Work& wk, double& l1, double& l2) {
  double n = 0.0, sh = 0.0, shh = 0.0, si = 0.0, sih = 0.0;
  for (std::size_t k = 0; k < wk.m * wk.m; ++k) {
    double v = wk.g[k];
    if (v <= kInteriorLo || v >= kInteriorHi) continue;
    double hv = wk.h[k], iv = rate_pointwise_d1(v);
    n += 1.0;
    sh += hv;
    shh += hv * hv;
    si += iv;
    sih += iv * hv;
  }
  if (n < 1.0) return;
  double a11 = n, a12 = 3.0 * sh, a22 = 9.0 * shh;
  double b1 = -si, b2 = -3.0 * sih;
  double det = a11 * a22 - a12 * a12;
  if (n >= 2.0 && det > 1e-12 * a11 * std::max(a22, 1e-30)) {
    l1 = (b1 * a22 - a12 * b2) / det;
    l2 = (a11 * b2 - a12 * b1) / det;
    return;
  }
  double mean_i = si / n, mean_h = sh / n;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < wk.m * wk.m; ++k) {
    double v = wk.g[k];
    if (v > kInteriorLo && v < kInteriorHi) continue;
    // With l1 = -mean_i - 3 l2 mean_h the pinned-cell gradient is
    // (I0'(v) - mean_i) + 3 l2 (h - mean_h); top cells need it <= 0,
    // bottom cells >= 0.
    double a = 3.0 * (wk.h[k] - mean_h);
    double b = -(rate_pointwise_d1(v) - mean_i);
    bool top = v >= kInteriorHi;
    if (std::abs(a) < 1e-12) continue;
    double bound = b / a;
    if ((top && a > 0.0) || (!top && a < 0.0)) hi = std::min(hi, bound);
    else lo = std::max(lo, bound);
  }
  if (lo <= 0.0 && hi >= 0.0) l2 = 0.0;
  else if (lo > hi) l2 = 0.5 * (lo + hi);  // inconsistent set: best effort
  else if (lo > 0.0) l2 = std::isfinite(hi) ? std::min(hi, lo * 1.05 + 0.01) : lo * 1.05 + 0.01;
  else l2 = std::isfinite(lo) ? std::max(lo, hi * 1.05 - 0.01) : hi * 1.05 - 0.01;
  l1 = -mean_i - 3.0 * l2 * mean_h;
}

// Dense Gaussian elimination with partial pivoting; the KKT systems here are
// a few hundred unknowns at most.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * b[k];
    b[r] = s / a[r * n + r];
  }
  return true;
}

// Active-set Newton on the KKT system over free upper-triangle cells plus the
// two multipliers. Finishes the projected-gradient iterate to machine
// precision when it is near a regular stationary point; returns false (and
// leaves the iterate polished as far as it got) otherwise.
bool newton_polish(Work& wk, double e_t, double t_t, double& l1, double& l2,
                   double tol_c, double tol_kkt) {
  const std::size_t m = wk.m;
  const double w = wk.w, w2 = w * w;
  const double lo = 1e-9, hi = 1.0 - 1e-9;
  for (int round = 0; round < 12; ++round) {
    wk.refresh();
    std::vector<std::pair<std::size_t, std::size_t>> free_cells;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) {
        double v = wk.g[i * m + j];
        if (v > lo && v < hi) free_cells.emplace_back(i, j);
      }
    const std::size_t nf = free_cells.size(), n = nf + 2;
    if (nf == 0) return false;
    std::vector<double> J(n * n, 0.0), rhs(n, 0.0);
    double ce = wk.e_val - e_t, ct = wk.t_val - t_t;
    double worst = std::max(std::abs(ce), std::abs(ct));
    for (std::size_t r = 0; r < nf; ++r) {
      auto [i, j] = free_cells[r];
      double fr = rate_pointwise_d1(wk.g[i * m + j]) + l1 + 3.0 * l2 * wk.h[i * m + j];
      worst = std::max(worst, std::abs(fr));
      rhs[r] = -fr;
    }
    if (worst <= tol_kkt && std::max(std::abs(ce), std::abs(ct)) <= tol_c) return true;
    rhs[nf] = -ce;
    rhs[nf + 1] = -ct;
    for (std::size_t r = 0; r < nf; ++r) {
      auto [i, j] = free_cells[r];
      for (std::size_t q = 0; q < nf; ++q) {
        auto [k, l] = free_cells[q];
        // d h_ij / d x_kl over both mirrored entries of the symmetric cell.
        double dh = 0.0;
        auto dh_entry = [&](std::size_t a, std::size_t b) {
          double v = 0.0;
          if (i == a) v += w * wk.g[j * m + b];
          if (j == a) v += w * wk.g[i * m + b];
          return v;
        };
        dh = dh_entry(k, l);
        if (k != l) dh += dh_entry(l, k);
        double val = 3.0 * l2 * dh;
        if (r == q) val += rate_pointwise_d2(wk.g[i * m + j]);
        J[r * n + q] = val;
      }
      J[r * n + nf] = 1.0;
      J[r * n + nf + 1] = 3.0 * wk.h[i * m + j];
    }
    for (std::size_t q = 0; q < nf; ++q) {
      auto [k, l] = free_cells[q];
      double mult = (k == l) ? 1.0 : 2.0;
      J[nf * n + q] = w2 * mult;
      J[(nf + 1) * n + q] = 3.0 * w2 * mult * wk.h[k * m + l];
    }
    std::vector<double> step = rhs;
    if (!solve_dense(J, step, n)) return false;
    double cap = 0.0;
    for (std::size_t q = 0; q < nf; ++q) cap = std::max(cap, std::abs(step[q]));
    double tau = cap > 0.2 ? 0.2 / cap : 1.0;
    for (std::size_t q = 0; q < nf; ++q) {
      auto [k, l] = free_cells[q];
      double v = std::min(1.0, std::max(0.0, wk.g[k * m + l] + tau * step[q]));
      wk.g[k * m + l] = wk.g[l * m + k] = v;
    }
    l1 += tau * step[nf];
    l2 += tau * step[nf + 1];
  }
  wk.refresh();
  return false;
}

double stationarity_residual(const Work& wk, double l1, double l2, double mu, double e_t,
                             double t_t) {
  double a = l1 + mu * (wk.e_val - e_t);
  double b = l2 + mu * (wk.t_val - t_t);
  double r = 0.0;
  for (std::size_t k = 0; k < wk.m * wk.m; ++k) {
    double grad = rate_pointwise_d1(wk.g[k]) + a + 3.0 * b * wk.h[k];
    double p = std::min(1.0, std::max(0.0, wk.g[k] - grad));
    r = std::max(r, std::abs(p - wk.g[k]));
  }
  return r;
}

StartOutcome run_start(std::vector<double> g0, std::size_t m, double e_t, double t_t,
                       const SolveConfig& cfg) {
  Work wk(m);
  wk.g = std::move(g0);
  pre_project(wk, e_t, t_t, 400);
  StartOutcome out;
  // Warm multiplier estimates at the projected start: with cold multipliers
  // the first subproblem is far from stationary even at the true optimizer
  // and its descent erases the start's structure.
  double l1 = 0.0, l2 = 0.0;
  warm_multipliers(wk, l1, l2);
  double mu = cfg.mu_initial;
  double tol_inner = 1e-4;
  double prev_cnorm = std::numeric_limits<double>::infinity();
  const bool trace = std::getenv("GRAPHON_LAB_SOLVER_TRACE") != nullptr;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    out.outer = outer + 1;
    double res = inner_solve(wk, e_t, t_t, l1, l2, mu, tol_inner, cfg.max_inner);
    double ce = wk.e_val - e_t, ct = wk.t_val - t_t;
    double cnorm = std::max(std::abs(ce), std::abs(ct));
    if (trace)
      std::fprintf(stderr,
                   "outer=%d mu=%.3g l1=%.6g l2=%.6g ce=%.3g ct=%.3g res=%.3g tol_in=%.3g I=%.9g\n",
                   outer, mu, l1, l2, ce, ct, res, tol_inner, wk.rate_val);
    out.ce = ce;
    out.ct = ct;
    if (cnorm <= cfg.tol_constraint && res <= cfg.tol_gradient) {
      out.converged = true;
      break;
    }
    // Near a stationary point, finish with the active-set Newton instead of
    // grinding out the projected-gradient tail.
    if (cnorm <= 1e-4 && res <= 1e-2) {
      double pl1 = l1 + mu * ce, pl2 = l2 + mu * ct;
      if (newton_polish(wk, e_t, t_t, pl1, pl2, cfg.tol_constraint, 1e-10)) {
        wk.refresh();
        double rce = wk.e_val - e_t, rct = wk.t_val - t_t;
        double rres = stationarity_residual(wk, pl1, pl2, mu, e_t, t_t);
        if (trace)
          std::fprintf(stderr, "  polish: ce=%.3g ct=%.3g res=%.3g\n", rce, rct, rres);
        if (std::max(std::abs(rce), std::abs(rct)) <= cfg.tol_constraint &&
            rres <= cfg.tol_gradient) {
          l1 = pl1;
          l2 = pl2;
          out.ce = rce;
          out.ct = rct;
          out.converged = true;
          break;
        }
      }
      wk.refresh();
    }
    if (res > 10.0 * tol_inner) break;  // inner stall (constraint geometry trap)
    // First-order multiplier step after each solved subproblem; stiffen the
    // penalty only when the constraint norm stops contracting. Once the
    // constraints sit at tolerance the multipliers are left alone: updates of
    // size mu*c would only inject noise into the stationarity residual.
    if (cnorm > cfg.tol_constraint) {
      l1 += mu * ce;
      l2 += mu * ct;
      if (cnorm > 0.25 * prev_cnorm) mu = std::min(mu * cfg.mu_growth, cfg.mu_cap);
    }
    prev_cnorm = cnorm;
    tol_inner = std::max(cfg.tol_gradient, tol_inner * 0.2);
  }
  out.g = wk.g;
  out.value = wk.rate_val;
  out.lambda1 = l1 + mu * out.ce;
  out.lambda2 = l2 + mu * out.ct;
  return out;
}

StepGraphon grid_graphon(const std::vector<double>& g, std::size_t m) {
  std::vector<double> vals(g);
  for (double& v : vals) v = std::min(1.0, std::max(0.0, v));
  // Enforce exact symmetry against rounding drift.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      double v = 0.5 * (vals[i * m + j] + vals[j * m + i]);
      vals[i * m + j] = vals[j * m + i] = v;
    }
  return StepGraphon::equal_blocks(m, vals);
}

// Least-squares multipliers over interior cells; falls back to the
// augmented-Lagrangian estimates when the fit is degenerate (constant h).
void fit_multipliers(const StepGraphon& g, double al_l1, double al_l2, double& l1, double& l2) {
  StepGraphon h = aux_h(g);
  std::size_t m = g.num_blocks();
  double n = 0.0, sh = 0.0, shh = 0.0, si = 0.0, sih = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double v = g.value(i, j);
      if (v <= kInteriorLo || v >= kInteriorHi) continue;
      double hv = h.value(i, j), iv = rate_pointwise_d1(v);
      n += 1.0;
      sh += hv;
      shh += hv * hv;
      si += iv;
      sih += iv * hv;
    }
  if (n < 2.0) {
    l1 = al_l1;
    l2 = al_l2;
    return;
  }
  // Normal equations for min sum (iv + l1 + 3 l2 hv)^2.
  double a11 = n, a12 = 3.0 * sh, a22 = 9.0 * shh;
  double b1 = -si, b2 = -3.0 * sih;
  double det = a11 * a22 - a12 * a12;
  if (det <= 1e-12 * a11 * std::max(a22, 1e-30)) {
    l2 = al_l2;
    l1 = (b1 - 3.0 * l2 * sh) / n;
    return;
  }
  l1 = (b1 * a22 - a12 * b2) / det;
  l2 = (a11 * b2 - a12 * b1) / det;
}

}  // namespace

double el_residual(const StepGraphon& g, double lambda1, double lambda2) {
  StepGraphon h = aux_h(g);
  std::size_t m = g.num_blocks();
  double r = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double v = g.value(i, j);
      if (v <= kInteriorLo || v >= kInteriorHi) continue;
      r = std::max(r, std::abs(rate_pointwise_d1(v) + lambda1 + 3.0 * lambda2 * h.value(i, j)));
    }
  return r;
}

SolveResult minimize_rate(double e, double t, const SolveConfig& cfg) {
  if (cfg.m < 2) throw DomainError("minimize_rate: grid size must be at least 2");
  if (!boundary::feasible(e, t))
    throw DomainError("minimize_rate: infeasible (e,t) request");
  bool on_bnd = false;
  {
    double lo = e < 1.0 ? boundary::min_triangle(std::max(0.0, e)) : 1.0;
    double hi = boundary::max_triangle(std::min(1.0, std::max(0.0, e)));
    on_bnd = std::abs(t - lo) <= 1e-9 || std::abs(t - hi) <= 1e-9 || e <= 1e-9 || e >= 1.0 - 1e-9;
  }

  const std::size_t m = cfg.m, mm = m * m;
  std::vector<std::vector<double>> starts;
  starts.reserve(cfg.starts);
  // Start 0: constant graphon at the edge density, with a small two-block
  // tilt. An exactly constant iterate is invariant under the gradient flow
  // (every cell sees the same gradient), so it could never split parts.
  {
    std::vector<double> v(mm);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        double si = i < m / 2 ? 1.0 : -1.0;
        double sj = j < m / 2 ? 1.0 : -1.0;
        double val = e - 1e-3 * si * sj;
        v[i * m + j] = std::min(1.0, std::max(0.0, val));
      }
    starts.push_back(std::move(v));
  }
  // Analytic candidates, resampled to the grid, when their branch applies.
  auto push_candidate = [&](const StepGraphon& cand) {
    StepGraphon rs = cand.resampled(m);
    std::vector<double> v(mm);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) v[i * m + j] = rs.value(i, j);
    starts.push_back(std::move(v));
  };
  if (static_cast<int>(starts.size()) < cfg.starts) {
    try {
      push_candidate(boundary::perturbative_optimizer(e, boundary::eps_from_t(e, t)));
    } catch (const DomainError&) {
    }
  }
  if (e > 0.5 && static_cast<int>(starts.size()) < cfg.starts) {
    try {
      push_candidate(boundary::scallop_optimizer(e));
    } catch (const DomainError&) {
    }
  }
  while (static_cast<int>(starts.size()) < cfg.starts) {
    std::mt19937_64 rng = rng_stream(cfg.seed, starts.size());
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<double> v(mm);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i; j < m; ++j) v[i * m + j] = v[j * m + i] = uni(rng);
    starts.push_back(std::move(v));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for_index(starts.size(), cfg.threads, [&](std::size_t idx) {
    outcomes[idx] = run_start(starts[idx], m, e, t, cfg);
  });

  // Deterministic merge: best converged value; ties within 1e-10 go to the
  // smallest start index (ascending scan makes that automatic).
  int best = -1;
  for (std::size_t idx = 0; idx < outcomes.size(); ++idx) {
    if (!outcomes[idx].converged) continue;
    if (best < 0 || outcomes[idx].value < outcomes[best].value - 1e-10) best = static_cast<int>(idx);
  }
  if (best < 0) {
    double bc = std::numeric_limits<double>::infinity();
    for (const auto& o : outcomes) bc = std::min(bc, std::max(std::abs(o.ce), std::abs(o.ct)));
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "minimize_rate: no start converged at e=%.6g t=%.6g (best constraint residual %.3g)",
                  e, t, bc);
    throw ConvergenceError(buf);
  }

  const StartOutcome& win = outcomes[best];
  SolveResult res{grid_graphon(win.g, m), win.value, 0.0, 0.0, 0.0,
                  std::abs(win.ce),       std::abs(win.ct),
                  win.converged,          best,
                  on_bnd,                 win.outer};
  fit_multipliers(res.graphon, win.lambda1, win.lambda2, res.lambda1, res.lambda2);
  res.el_residual_sup = el_residual(res.graphon, res.lambda1, res.lambda2);
  res.value = rate(res.graphon);
  return res;
}

double second_variation(const StepGraphon& g, const std::vector<std::vector<double>>& delta,
                        double lambda2) {
  std::size_t m = g.num_blocks();
  if (delta.size() != m) throw DomainError("second_variation: block count mismatch");
  for (std::size_t i = 0; i < m; ++i) {
    if (delta[i].size() != m) throw DomainError("second_variation: delta not square");
    for (std::size_t j = 0; j < m; ++j)
      if (delta[i][j] != delta[j][i]) throw DomainError("second_variation: delta not symmetric");
  }
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = g.width(i);
  double cubic = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double gij = g.value(i, j);
      if (gij == 0.0) continue;
      double inner = 0.0;
      for (std::size_t k = 0; k < m; ++k) inner += w[k] * delta[i][k] * delta[j][k];
      cubic += w[i] * w[j] * gij * inner;
    }
  double quad = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      quad += w[i] * w[j] * rate_pointwise_d2(g.value(i, j)) * delta[i][j] * delta[i][j];
  return 3.0 * lambda2 * cubic + 0.5 * quad;
}

std::vector<std::vector<double>> project_constraint_tangent(const StepGraphon& g,
                                                            std::vector<std::vector<double>> delta) {
  std::size_t m = g.num_blocks();
  if (delta.size() != m) throw DomainError("project_constraint_tangent: block count mismatch");
  StepGraphon hg = aux_h(g);
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = g.width(i);
  auto dot = [&](const std::vector<std::vector<double>>& a, const std::vector<std::vector<double>>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) s += w[i] * w[j] * a[i][j] * b[i][j];
    return s;
  };
  std::vector<std::vector<double>> ones(m, std::vector<double>(m, 1.0));
  std::vector<std::vector<double>> h(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h[i][j] = hg.value(i, j);
  // Orthonormalize {1, h} then subtract both components.
  double n1 = std::sqrt(dot(ones, ones));
  for (auto& row : ones)
    for (double& v : row) v /= n1;
  double proj = dot(h, ones);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) h[i][j] -= proj * ones[i][j];
  double n2 = std::sqrt(dot(h, h));
  bool have_h = n2 > 1e-14;
  if (have_h)
    for (auto& row : h)
      for (double& v : row) v /= n2;
  double c1 = dot(delta, ones);
  double c2 = have_h ? dot(delta, h) : 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      delta[i][j] -= c1 * ones[i][j] + (have_h ? c2 * h[i][j] : 0.0);
  return delta;
}

namespace detail {

std::vector<double> rate_gradient(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out[i * m + j] = g.width(i) * g.width(j) * rate_pointwise_d1(g.value(i, j));
  return out;
}

std::vector<double> triangle_gradient(const StepGraphon& g) {
  StepGraphon h = aux_h(g);
  std::size_t m = g.num_blocks();
  std::vector<double> out(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      out[i * m + j] = 3.0 * g.width(i) * g.width(j) * h.value(i, j);
  return out;
}

}  // namespace detail

namespace {

long long quant(double x) { return std::llround(x * 1e6); }

std::vector<double> block_degrees(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  std::vector<double> d(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) d[i] += g.width(j) * g.value(i, j);
  return d;
}

}  // namespace

StepGraphon canonicalize(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  std::vector<double> deg = block_degrees(g);
  std::vector<std::size_t> placed;
  std::vector<bool> used(m, false);
  placed.reserve(m);

  auto key_less = [&](std::size_t a, std::size_t b) {
    if (quant(deg[a]) != quant(deg[b])) return quant(deg[a]) < quant(deg[b]);
    if (quant(g.width(a)) != quant(g.width(b))) return quant(g.width(a)) < quant(g.width(b));
    for (std::size_t p : placed) {
      long long va = quant(g.value(a, p)), vb = quant(g.value(b, p));
      if (va != vb) return va < vb;
    }
    std::vector<long long> ra, rb;
    for (std::size_t u = 0; u < m; ++u) {
      if (used[u] || u == a) continue;
      ra.push_back(quant(g.value(a, u)));
    }
    for (std::size_t u = 0; u < m; ++u) {
      if (used[u] || u == b) continue;
      rb.push_back(quant(g.value(b, u)));
    }
    std::sort(ra.rbegin(), ra.rend());
    std::sort(rb.rbegin(), rb.rend());
    if (ra != rb) return ra < rb;
    if (quant(g.value(a, a)) != quant(g.value(b, b)))
      return quant(g.value(a, a)) < quant(g.value(b, b));
    return a < b;  // total order: stable under repetition
  };

  for (std::size_t step = 0; step < m; ++step) {
    std::size_t best = m;
    for (std::size_t r = 0; r < m; ++r) {
      if (used[r]) continue;
      if (best == m || key_less(r, best)) best = r;
    }
    used[best] = true;
    placed.push_back(best);
  }
  return g.permuted(placed);
}

namespace {

double l1_distance_refined(const StepGraphon& a, const StepGraphon& b) {
  std::vector<double> bounds = merged_boundaries(a.boundaries(), b.boundaries());
  StepGraphon ar = a.refined(bounds), br = b.refined(bounds);
  std::size_t m = ar.num_blocks();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      s += ar.width(i) * ar.width(j) * std::abs(ar.value(i, j) - br.value(i, j));
  return s;
}

// L1 between the coarse template and the fine graphon averaged over an
// assignment of fine blocks to coarse parts, plus a penalty for measure
// mismatch between the assigned mass and the template parts.
double assignment_cost(const StepGraphon& fine, const StepGraphon& coarse,
                       const std::vector<int>& part_of) {
  std::size_t mc = coarse.num_blocks(), mf = fine.num_blocks();
  std::vector<double> mass(mc, 0.0);
  for (std::size_t i = 0; i < mf; ++i) mass[part_of[i]] += fine.width(i);
  std::vector<std::vector<double>> acc(mc, std::vector<double>(mc, 0.0));
  for (std::size_t i = 0; i < mf; ++i)
    for (std::size_t j = 0; j < mf; ++j)
      acc[part_of[i]][part_of[j]] += fine.width(i) * fine.width(j) * fine.value(i, j);
  double cost = 0.0;
  for (std::size_t a = 0; a < mc; ++a)
    for (std::size_t b = 0; b < mc; ++b) {
      double area = mass[a] * mass[b];
      double avg = area > 0.0 ? acc[a][b] / area : 0.0;
      cost += area * std::abs(avg - coarse.value(a, b));
    }
  for (std::size_t a = 0; a < mc; ++a) cost += std::abs(mass[a] - coarse.width(a));
  return cost;
}

double align_and_compare(const StepGraphon& fine, const StepGraphon& coarse) {
  std::size_t mf = fine.num_blocks(), mc = coarse.num_blocks();
  // Target part sizes proportional to the template widths.
  std::vector<int> size(mc, 0);
  {
    int assigned = 0;
    for (std::size_t a = 0; a < mc; ++a) {
      size[a] = static_cast<int>(std::floor(coarse.width(a) * mf + 0.5));
      assigned += size[a];
    }
    int extra = static_cast<int>(mf) - assigned;
    for (std::size_t a = 0; extra != 0 && a < mc; ++a) {
      int d = extra > 0 ? 1 : -1;
      if (size[a] + d >= 0) {
        size[a] += d;
        extra -= d;
      }
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (int init = 0; init < 4; ++init) {
    std::vector<int> part_of(mf);
    std::vector<std::size_t> order(mf);
    std::iota(order.begin(), order.end(), 0);
    if (init > 0) {
      std::mt19937_64 rng = rng_stream(0xa11960ull, init);
      std::shuffle(order.begin(), order.end(), rng);
    }
    std::size_t pos = 0;
    for (std::size_t a = 0; a < mc; ++a)
      for (int k = 0; k < size[a] && pos < mf; ++k) part_of[order[pos++]] = static_cast<int>(a);
    while (pos < mf) part_of[order[pos++]] = static_cast<int>(mc - 1);

    double cost = assignment_cost(fine, coarse, part_of);
    for (int sweep = 0; sweep < 50; ++sweep) {
      bool improved = false;
      for (std::size_t i = 0; i < mf; ++i)
        for (std::size_t j = i + 1; j < mf; ++j) {
          if (part_of[i] == part_of[j]) continue;
          std::swap(part_of[i], part_of[j]);
          double c2 = assignment_cost(fine, coarse, part_of);
          if (c2 < cost - 1e-15) {
            cost = c2;
            improved = true;
          } else {
            std::swap(part_of[i], part_of[j]);
          }
        }
      if (!improved) break;
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace

double compare_reduced(const StepGraphon& f, const StepGraphon& g) {
  StepGraphon fc = canonicalize(f);
  StepGraphon gc = canonicalize(g);
  if (fc.num_blocks() == gc.num_blocks()) {
    double best = l1_distance_refined(fc, gc);
    // Permute within small quantized-degree tie groups of fc.
    std::size_t m = fc.num_blocks();
    std::vector<double> deg = block_degrees(fc);
    std::size_t i = 0;
    long long budget = 256;
    while (i < m && budget > 0) {
      std::size_t j = i + 1;
      while (j < m && std::abs(deg[j] - deg[i]) <= 1e-9 &&
             std::abs(fc.width(j) - fc.width(i)) <= 1e-12)
        ++j;
      std::size_t len = j - i;
      if (len >= 2 && len <= 4) {
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        std::vector<std::size_t> group(perm.begin() + i, perm.begin() + j);
        std::sort(group.begin(), group.end());
        do {
          std::copy(group.begin(), group.end(), perm.begin() + i);
          best = std::min(best, l1_distance_refined(fc.permuted(perm), gc));
          if (--budget <= 0) break;
        } while (std::next_permutation(group.begin(), group.end()));
      }
      i = j;
    }
    return best;
  }
  const StepGraphon& fine = fc.num_blocks() > gc.num_blocks() ? fc : gc;
  const StepGraphon& coarse = fc.num_blocks() > gc.num_blocks() ? gc : fc;
  return align_and_compare(fine, coarse);
}

}  // namespace graphon_lab::solver
