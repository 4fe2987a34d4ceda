#include "graphon_lab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "graphon_lab/errors.hpp"
#include "graphon_lab/util.hpp"

namespace graphon_lab {

namespace {
constexpr double kClamp = 1e-12;
constexpr double kHomTermGuard = 1e9;
constexpr std::size_t kCutExactMax = 20;
}  // namespace

StepGraphon checkerboard(const SimpleGraph& g) {
  int n = g.n();
  std::vector<double> vals(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && g.has_edge(i, j)) vals[static_cast<std::size_t>(i) * n + j] = 1.0;
  return StepGraphon::equal_blocks(static_cast<std::size_t>(n), vals);
}

double edge_density(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double wi = g.width(i);
    for (std::size_t j = 0; j < m; ++j) s += wi * g.width(j) * g.value(i, j);
  }
  return s;
}

double triangle_density(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = g.width(i);
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double gij = g.value(i, j);
      if (gij == 0.0) continue;
      double wij = w[i] * w[j] * gij;
      double inner = 0.0;
      for (std::size_t k = 0; k < m; ++k) inner += w[k] * g.value(j, k) * g.value(k, i);
      s += wij * inner;
    }
  return s;
}

double hom_density(const Motif& h, const StepGraphon& g) {
  const SimpleGraph& H = h.graph();
  int ell = H.n();
  std::size_t m = g.num_blocks();
  double terms = std::pow(static_cast<double>(m), ell);
  if (terms > kHomTermGuard)
    throw ResourceError("hom_density: m^|V(H)| exceeds the 1e9 term guard");

  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = g.width(i);
  // Edges of H incident to vertex v with the other endpoint already assigned.
  std::vector<std::vector<int>> back_edges(ell);
  for (int v = 0; v < ell; ++v)
    for (int u = 0; u < v; ++u)
      if (H.has_edge(u, v)) back_edges[v].push_back(u);

  std::vector<std::size_t> assign(ell, 0);
  double total = 0.0;
  // DFS over block assignments with incremental partial products.
  std::vector<double> partial(ell + 1, 1.0);
  int v = 0;
  while (true) {
    if (v == ell) {
      total += partial[ell];
      --v;
      ++assign[v];
    } else if (assign[v] == m) {
      assign[v] = 0;
      if (v == 0) break;
      --v;
      ++assign[v];
    } else {
      double f = w[assign[v]];
      for (int u : back_edges[v]) f *= g.value(assign[u], assign[v]);
      if (f == 0.0) {
        ++assign[v];  // dead branch
      } else {
        partial[v + 1] = partial[v] * f;
        ++v;
      }
    }
  }
  return total;
}

double rate_pointwise(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 0.5 * (u * std::log(u) + (1.0 - u) * std::log(1.0 - u));
}

double rate_pointwise_d1(double u) {
  u = std::min(1.0 - kClamp, std::max(kClamp, u));
  return 0.5 * (std::log(u) - std::log(1.0 - u));
}

double rate_pointwise_d2(double u) {
  u = std::min(1.0 - kClamp, std::max(kClamp, u));
  return 0.5 * (1.0 / u + 1.0 / (1.0 - u));
}

double rate(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double wi = g.width(i);
    for (std::size_t j = 0; j < m; ++j) s += wi * g.width(j) * rate_pointwise(g.value(i, j));
  }
  return s;
}

StepGraphon aux_h(const StepGraphon& g) {
  std::size_t m = g.num_blocks();
  std::vector<std::vector<double>> h(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += g.width(k) * g.value(i, k) * g.value(j, k);
      h[i][j] = h[j][i] = std::min(1.0, std::max(0.0, s));
    }
  std::vector<double> b = g.boundaries();
  return StepGraphon(std::move(b), std::move(h));
}

namespace {

// For fixed S (row aggregate r_j = sum_{i in S} w_i w_j d_ij), the optimal T
// is the positive (or negative) support of r.
double best_abs_for_rows(const std::vector<double>& r) {
  double pos = 0.0, neg = 0.0;
  for (double x : r) {
    if (x > 0.0) pos += x;
    else neg -= x;
  }
  return std::max(pos, neg);
}

}  // namespace

CutDistance cut_distance_labeled(const StepGraphon& f, const StepGraphon& g) {
  std::vector<double> bounds = merged_boundaries(f.boundaries(), g.boundaries());
  StepGraphon fr = f.refined(bounds);
  StepGraphon gr = g.refined(bounds);
  std::size_t m = fr.num_blocks();
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = fr.width(i);
  std::vector<double> d(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      d[i * m + j] = w[i] * w[j] * (fr.value(i, j) - gr.value(i, j));

  if (m <= kCutExactMax) {
    double best = 0.0;
    std::vector<double> r(m, 0.0);
    // Gray-code walk over S so each step updates r by one row.
    std::uint64_t mask = 0;
    for (std::uint64_t code = 1; code < (1ull << m); ++code) {
      std::uint64_t gray = code ^ (code >> 1);
      std::uint64_t flip = gray ^ mask;
      int i = std::countr_zero(flip);
      double sign = (gray >> i) & 1ull ? 1.0 : -1.0;
      for (std::size_t j = 0; j < m; ++j) r[j] += sign * d[static_cast<std::size_t>(i) * m + j];
      mask = gray;
      best = std::max(best, best_abs_for_rows(r));
    }
    return {best, true};
  }

  // Alternating maximization with multistart; lower bound only.
  double best = 0.0;
  std::mt19937_64 rng = rng_stream(0xc07d15ull, m);
  for (int start = 0; start < 24; ++start) {
    std::vector<int> s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = start == 0 ? 1 : static_cast<int>(rng() & 1ull);
    double local = 0.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
      // T given S, for both signs of the objective.
      std::vector<double> r(m, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        if (s[i])
          for (std::size_t j = 0; j < m; ++j) r[j] += d[i * m + j];
      double pos = 0.0, neg = 0.0;
      for (double x : r) {
        if (x > 0) pos += x;
        else neg -= x;
      }
      bool positive = pos >= neg;
      std::vector<int> t(m);
      for (std::size_t j = 0; j < m; ++j) t[j] = positive ? (r[j] > 0) : (r[j] < 0);
      // S given T.
      std::vector<double> c(m, 0.0);
      for (std::size_t j = 0; j < m; ++j)
        if (t[j])
          for (std::size_t i = 0; i < m; ++i) c[i] += d[i * m + j];
      double val = 0.0;
      std::vector<int> s_new(m);
      for (std::size_t i = 0; i < m; ++i) {
        s_new[i] = positive ? (c[i] > 0) : (c[i] < 0);
        if (s_new[i]) val += positive ? c[i] : -c[i];
      }
      if (val <= local + 1e-15) { local = std::max(local, val); break; }
      local = val;
      s = s_new;
    }
    best = std::max(best, local);
  }
  return {best, false};
}

double hom_metric(const StepGraphon& f, const StepGraphon& g, const std::vector<Motif>& family) {
  double s = 0.0, weight = 1.0;
  for (const Motif& h : family) {
    weight *= 0.5;
    s += weight * std::abs(hom_density(h, f) - hom_density(h, g));
  }
  return s;
}

}  // namespace graphon_lab
