#include "graphon_lab/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include "graphon_lab/boundary.hpp"
#include "graphon_lab/densities.hpp"
#include "graphon_lab/errors.hpp"
#include "graphon_lab/util.hpp"

namespace graphon_lab::ensemble {

long long binom2(int n) { return static_cast<long long>(n) * (n - 1) / 2; }
long long binom3(int n) { return static_cast<long long>(n) * (n - 1) * (n - 2) / 6; }

bool in_window(int n, long long edges, long long triangles, double e, double t, double delta) {
  long double c2 = static_cast<long double>(binom2(n));
  long double c3 = static_cast<long double>(binom3(n));
  long double el = static_cast<long double>(e) - static_cast<long double>(delta);
  long double eh = static_cast<long double>(e) + static_cast<long double>(delta);
  long double tl = static_cast<long double>(t) - static_cast<long double>(delta);
  long double th = static_cast<long double>(t) + static_cast<long double>(delta);
  return static_cast<long double>(edges) > c2 * el && static_cast<long double>(edges) < c2 * eh &&
         static_cast<long double>(triangles) > c3 * tl &&
         static_cast<long double>(triangles) < c3 * th;
}

void DensityOfStates::add(DosEntry entry) {
  entries_.push_back(entry);
  std::sort(entries_.begin(), entries_.end(), [](const DosEntry& a, const DosEntry& b) {
    return a.edges != b.edges ? a.edges < b.edges : a.triangles < b.triangles;
  });
}

const DosEntry* DensityOfStates::find(long long edges, long long triangles) const {
  for (const auto& e : entries_)
    if (e.edges == edges && e.triangles == triangles) return &e;
  return nullptr;
}

double DensityOfStates::ln_total() const {
  if (exact_) {
    unsigned long long total = 0;
    for (const auto& e : entries_) total += e.count;
    return std::log(static_cast<double>(total));
  }
  std::vector<double> xs;
  xs.reserve(entries_.size());
  for (const auto& e : entries_) xs.push_back(e.ln_count);
  return logsumexp(xs);
}

void DensityOfStates::normalize_total() {
  double target = binom2(n_) * std::log(2.0);
  double shift = target - ln_total();
  for (auto& e : entries_) e.ln_count += shift;
  normalization_ = "total";
}

std::map<long long, unsigned long long> DensityOfStates::edge_marginal() const {
  std::map<long long, unsigned long long> out;
  for (const auto& e : entries_) out[e.edges] += e.count;
  return out;
}

void DensityOfStates::to_csv(std::ostream& os, const std::string& metadata) const {
  os << "# graphon_lab dos\n";
  os << "# n=" << n_ << " exact=" << (exact_ ? 1 : 0) << " converged=" << (converged_ ? 1 : 0)
     << " normalization=" << normalization_ << "\n";
  if (!metadata.empty()) os << "# " << metadata << "\n";
  os << "n,E,T,ln_count\n";
  char buf[96];
  for (const auto& e : entries_) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.17g\n", n_, e.edges, e.triangles, e.ln_count);
    os << buf;
  }
}

DensityOfStates DensityOfStates::from_csv(std::istream& is) {
  std::string line;
  int n = -1;
  bool exact = false, converged = true;
  std::string normalization = "total";
  std::vector<DosEntry> entries;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string tok;
      while (ss >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
        if (key == "n") n = std::stoi(val);
        else if (key == "exact") exact = val == "1";
        else if (key == "converged") converged = val == "1";
        else if (key == "normalization") normalization = val;
      }
      continue;
    }
    if (line.rfind("n,", 0) == 0) continue;  // column header
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw DomainError("DensityOfStates::from_csv: bad row: " + line);
    if (n < 0) n = std::stoi(cells[0]);
    DosEntry e{std::stoll(cells[1]), std::stoll(cells[2]), std::stod(cells[3]), 0};
    if (exact) e.count = static_cast<unsigned long long>(std::llround(std::exp(e.ln_count)));
    entries.push_back(e);
  }
  if (n < 0) throw DomainError("DensityOfStates::from_csv: empty table");
  DensityOfStates dos(n, exact);
  dos.set_converged(converged);
  dos.set_normalization(normalization);
  for (auto& e : entries) dos.add(e);
  return dos;
}

DensityOfStates exact_enumerate(int n, bool force) {
  if (n < 1) throw DomainError("exact_enumerate: n must be positive");
  if (n > 8 || (n == 8 && !force))
    throw ResourceError("exact_enumerate: n > 7 needs the explicit force flag (n <= 8)");
  const int pairs = static_cast<int>(binom2(n));
  std::vector<std::pair<int, int>> pair_of(pairs);
  {
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pair_of[k++] = {i, j};
  }
  const long long max_t = binom3(n);
  // Dense histogram over the full (E,T) rectangle.
  std::vector<unsigned long long> hist(static_cast<std::size_t>(pairs + 1) * (max_t + 1), 0ull);
  SimpleGraph g(n);
  long long E = 0, T = 0;
  hist[0] += 1;  // empty graph
  const std::uint64_t total = 1ull << pairs;
  for (std::uint64_t code = 1; code < total; ++code) {
    int bit = std::countr_zero(code);  // reflected Gray code flips this bit
    auto [i, j] = pair_of[bit];
    auto [de, dt] = g.toggle_edge_delta(i, j);
    g.toggle_edge(i, j);
    E += de;
    T += dt;
    hist[static_cast<std::size_t>(E) * (max_t + 1) + T] += 1;
  }
  DensityOfStates dos(n, true);
  for (int e = 0; e <= pairs; ++e)
    for (long long t = 0; t <= max_t; ++t) {
      unsigned long long c = hist[static_cast<std::size_t>(e) * (max_t + 1) + t];
      if (c) dos.add({e, t, std::log(static_cast<double>(c)), c});
    }
  return dos;
}

namespace {

struct WalkState {
  SimpleGraph g;
  long long E = 0, T = 0;
};

long long bin_key(long long E, long long T, long long t_span) { return E * t_span + T; }

// Greedy repair toward the window; count-unit distances with the triangle
// term weighted up, so removing a k-triangle edge beats its one-edge cost
// whenever the triangle count is what is out of range.
double window_score(int n, long long E, long long T, double e, double t, double delta) {
  double c2 = static_cast<double>(binom2(n)), c3 = static_cast<double>(binom3(n));
  double s = 0.0;
  s += std::max(0.0, c2 * (e - delta) - E) + std::max(0.0, E - c2 * (e + delta));
  s += 3.0 * (std::max(0.0, c3 * (t - delta) - T) + std::max(0.0, T - c3 * (t + delta)));
  return s;
}

bool lattice_window_nonempty(int n, double e, double t, double delta) {
  // The window is a product of open intervals, so check each axis for an
  // integer lattice point strictly inside.
  auto axis_has_point = [](long double scale, long double center, long double radius,
                           long long maxv) {
    long double lo = scale * (center - radius), hi = scale * (center + radius);
    long long first = static_cast<long long>(std::floor(static_cast<double>(lo))) + 1;
    while (static_cast<long double>(first) <= lo) ++first;  // strictness at exact integers
    first = std::max(first, 0ll);
    return static_cast<long double>(first) < hi && first <= maxv;
  };
  return axis_has_point(binom2(n), e, delta, binom2(n)) &&
         axis_has_point(binom3(n), t, delta, binom3(n));
}

WalkState feasible_start(int n, double e, double t, double delta, std::mt19937_64& rng) {
  // Predicted optimizer: the lowest-rate analytic candidate whose own
  // densities land inside (or at least near) the window. A candidate sitting
  // at the wrong (e,t) is no prediction at all, however low its rate.
  StepGraphon pred = StepGraphon::constant(std::min(1.0 - 1e-9, std::max(1e-9, e)));
  double best_rate = 1e300;
  auto consider = [&](const StepGraphon& cand) {
    if (std::abs(edge_density(cand) - e) > delta || std::abs(triangle_density(cand) - t) > delta)
      return;
    double r = rate(cand);
    if (r < best_rate) {
      best_rate = r;
      pred = cand;
    }
  };
  consider(StepGraphon::constant(std::min(1.0 - 1e-9, std::max(1e-9, e))));
  try {
    consider(boundary::perturbative_optimizer(e, boundary::eps_from_t(e, t)));
  } catch (const DomainError&) {
  }
  if (e > 0.5) {
    try {
      consider(boundary::scallop_optimizer(e));
    } catch (const DomainError&) {
    }
  }
  // Independent thresholding against the predicted kernel.
  WalkState st{SimpleGraph(n), 0, 0};
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    double xi = (i + 0.5) / n;
    for (int j = i + 1; j < n; ++j) {
      double xj = (j + 0.5) / n;
      if (uni(rng) < pred.value_at(xi, xj)) st.g.set_edge(i, j, true);
    }
  }
  st.E = st.g.edge_count();
  st.T = st.g.triangle_count();
  // Greedy repair: steepest of a few random toggles; plateau steps keep the
  // score and random-walk sideways.
  long long budget = 100ll * n * n;
  std::uniform_int_distribution<int> pick(0, n - 1);
  double score = window_score(n, st.E, st.T, e, t, delta);
  while (!in_window(n, st.E, st.T, e, t, delta) && budget-- > 0) {
    int best_i = -1, best_j = -1;
    double best_score = score;
    bool strict = false;
    for (int probe = 0; probe < 8; ++probe) {
      int i = pick(rng), j = pick(rng);
      if (i == j) continue;
      auto [de, dt] = st.g.toggle_edge_delta(i, j);
      double s2 = window_score(n, st.E + de, st.T + dt, e, t, delta);
      if (s2 < best_score - 1e-15) {
        best_score = s2;
        best_i = i;
        best_j = j;
        strict = true;
      } else if (!strict && best_i < 0 && s2 <= score) {
        best_i = i;
        best_j = j;
      }
    }
    if (best_i < 0) continue;
    auto [de, dt] = st.g.toggle_edge_delta(best_i, best_j);
    st.g.toggle_edge(best_i, best_j);
    st.E += de;
    st.T += dt;
    score = window_score(n, st.E, st.T, e, t, delta);
  }
  if (!in_window(n, st.E, st.T, e, t, delta)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "feasible_start: could not reach the window within budget (stuck at E=%lld "
                  "T=%lld for e=%g t=%g delta=%g)",
                  st.E, st.T, e, t, delta);
    throw ConvergenceError(buf);
  }
  return st;
}

}  // namespace

DensityOfStates wang_landau(int n, const WLConfig& cfg) {
  if (n < 2 || n > 64) throw DomainError("wang_landau: n must lie in [2, 64]");
  const long long c2 = binom2(n), c3 = binom3(n);
  const long long t_span = c3 + 1;
  std::mt19937_64 rng = rng_stream(cfg.seed, 0);

  WalkState st{SimpleGraph(n), 0, 0};
  if (cfg.window)
    st = feasible_start(n, cfg.window->e, cfg.window->t, cfg.window->delta, rng);

  std::unordered_map<long long, std::size_t> index;
  std::vector<double> lng;
  std::vector<long long> hist;
  std::vector<long long> keyof;
  index.reserve(4096);
  auto bin_index = [&](long long E, long long T) -> std::size_t {
    long long key = bin_key(E, T, t_span);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    double init = lng.empty() ? 0.0 : *std::min_element(lng.begin(), lng.end());
    index.emplace(key, lng.size());
    lng.push_back(init);
    hist.push_back(0);
    keyof.push_back(key);
    return lng.size() - 1;
  };

  std::size_t cur = bin_index(st.E, st.T);
  double ln_f = cfg.ln_f_initial;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::pair<int, int>> pair_of(static_cast<std::size_t>(c2));
  {
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pair_of[k++] = {i, j};
  }
  std::uniform_int_distribution<std::size_t> pick(0, pair_of.size() - 1);

  long long sweeps = 0;
  long long steps_since_recount = 0;
  bool reached_final = false;
  while (sweeps < cfg.max_sweeps) {
    for (long long s = 0; s < cfg.check_interval && sweeps < cfg.max_sweeps; ++s, ++sweeps) {
      for (long long mv = 0; mv < c2; ++mv) {
        auto [i, j] = pair_of[pick(rng)];
        auto [de, dt] = st.g.toggle_edge_delta(i, j);
        long long E2 = st.E + de, T2 = st.T + dt;
        bool allowed = !cfg.window || in_window(n, E2, T2, cfg.window->e, cfg.window->t,
                                                cfg.window->delta);
        if (allowed) {
          std::size_t prop = bin_index(E2, T2);
          if (lng[cur] >= lng[prop] || uni(rng) < std::exp(lng[cur] - lng[prop])) {
            st.g.toggle_edge(i, j);
            st.E = E2;
            st.T = T2;
            cur = prop;
          }
        }
        lng[cur] += ln_f;
        hist[cur] += 1;
        if (++steps_since_recount >= 1000000) {
          steps_since_recount = 0;
          if (st.g.edge_count() != st.E || st.g.triangle_count() != st.T)
            throw ConvergenceError("wang_landau: incremental count drift detected");
        }
      }
    }
    // Flatness over discovered bins only.
    long long mn = hist.empty() ? 0 : *std::min_element(hist.begin(), hist.end());
    double mean = 0.0;
    for (long long h : hist) mean += static_cast<double>(h);
    mean /= std::max<std::size_t>(1, hist.size());
    if (mn >= cfg.flatness * mean && mn > 0) {
      ln_f *= cfg.f_reduction;
      std::fill(hist.begin(), hist.end(), 0);
      if (ln_f < cfg.ln_f_final) {
        reached_final = true;
        break;
      }
    }
  }

  DensityOfStates dos(n, false);
  for (std::size_t k = 0; k < lng.size(); ++k) {
    long long key = keyof[k];
    dos.add({key / t_span, key % t_span, lng[k], 0});
  }
  dos.set_converged(reached_final);
  if (!cfg.window) {
    dos.normalize_total();
  } else {
    dos.set_normalization("window-relative");
  }
  return dos;
}

DensityOfStates wang_landau_merged(int n, const WLConfig& cfg, int walkers, int threads) {
  if (walkers < 1) throw DomainError("wang_landau_merged: walkers must be positive");
  std::vector<DensityOfStates> runs;
  runs.reserve(walkers);
  for (int w = 0; w < walkers; ++w) runs.emplace_back(n, false);
  parallel_for_index(static_cast<std::size_t>(walkers), threads, [&](std::size_t w) {
    WLConfig c = cfg;
    c.seed = splitmix64(cfg.seed ^ (0x77a1ull + w));
    runs[w] = wang_landau(n, c);
  });
  // Average ln_count per bin over the walkers that discovered it.
  std::map<std::pair<long long, long long>, std::pair<double, int>> acc;
  bool all_converged = true;
  for (const auto& run : runs) {
    all_converged = all_converged && run.converged();
    for (const auto& e : run.entries()) {
      auto& slot = acc[{e.edges, e.triangles}];
      slot.first += e.ln_count;
      slot.second += 1;
    }
  }
  DensityOfStates dos(n, false);
  for (const auto& [key, slot] : acc)
    dos.add({key.first, key.second, slot.first / slot.second, 0});
  dos.set_converged(all_converged);
  if (!cfg.window) dos.normalize_total();
  else dos.set_normalization("window-relative");
  return dos;
}

double entropy_finite(const DensityOfStates& dos, double e, double t, double delta) {
  int n = dos.n();
  if (!lattice_window_nonempty(n, e, t, delta))
    throw EmptyWindowError("entropy_finite: window misses the (E,T) lattice entirely");
  bool any = false;
  unsigned long long exact_sum = 0;
  std::vector<double> lns;
  for (const auto& entry : dos.entries()) {
    if (!in_window(n, entry.edges, entry.triangles, e, t, delta)) continue;
    any = true;
    exact_sum += entry.count;
    lns.push_back(entry.ln_count);
  }
  if (!any)
    throw EmptyWindowError("entropy_finite: no counted states inside the window");
  double ln_z = dos.exact() ? std::log(static_cast<double>(exact_sum)) : logsumexp(lns);
  return ln_z / (static_cast<double>(n) * n);
}

std::vector<SimpleGraph> sample_constrained(int n, double e, double t, double delta,
                                            const SampleConfig& cfg) {
  if (n < 2 || n > 512) throw DomainError("sample_constrained: n out of range");
  if (!lattice_window_nonempty(n, e, t, delta))
    throw EmptyWindowError("sample_constrained: window misses the (E,T) lattice");
  std::mt19937_64 rng = rng_stream(cfg.seed, 1);
  WalkState st = feasible_start(n, e, t, delta, rng);
  const long long c2 = binom2(n);
  std::vector<std::pair<int, int>> pair_of(static_cast<std::size_t>(c2));
  {
    int k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) pair_of[k++] = {i, j};
  }
  std::uniform_int_distribution<std::size_t> pick(0, pair_of.size() - 1);
  auto sweep = [&]() {
    for (long long mv = 0; mv < c2; ++mv) {
      auto [i, j] = pair_of[pick(rng)];
      auto [de, dt] = st.g.toggle_edge_delta(i, j);
      if (in_window(n, st.E + de, st.T + dt, e, t, delta)) {
        st.g.toggle_edge(i, j);
        st.E += de;
        st.T += dt;
      }
    }
  };
  for (int s = 0; s < cfg.burnin_sweeps; ++s) sweep();
  std::vector<SimpleGraph> out;
  out.reserve(cfg.count);
  for (int k = 0; k < cfg.count; ++k) {
    for (int s = 0; s < cfg.thin_sweeps; ++s) sweep();
    out.push_back(st.g);
  }
  return out;
}

}  // namespace graphon_lab::ensemble
