#ifndef GRAPHON_LAB_ENSEMBLE_HPP
#define GRAPHON_LAB_ENSEMBLE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "graphon_lab/simple_graph.hpp"

namespace graphon_lab::ensemble {

long long binom2(int n);
long long binom3(int n);

// Strict open-window membership per the microcanonical definition:
// E/C(n,2) in (e-delta, e+delta) and T/C(n,3) in (t-delta, t+delta).
// Evaluated in extended precision so boundary lattice points are excluded
// exactly when they coincide with the window edge.
bool in_window(int n, long long edges, long long triangles, double e, double t, double delta);

struct DosEntry {
  long long edges;
  long long triangles;
  double ln_count;
  unsigned long long count;  // populated only for exact tables
};

// ln-count table over the (edge count, triangle count) lattice for fixed n.
class DensityOfStates {
 public:
  DensityOfStates(int n, bool exact) : n_(n), exact_(exact) {}

  int n() const { return n_; }
  bool exact() const { return exact_; }
  bool converged() const { return converged_; }
  void set_converged(bool v) { converged_ = v; }
  const std::string& normalization() const { return normalization_; }
  void set_normalization(std::string v) { normalization_ = std::move(v); }

  void add(DosEntry entry);
  const std::vector<DosEntry>& entries() const { return entries_; }
  const DosEntry* find(long long edges, long long triangles) const;

  // ln of the summed counts; exact tables use integer summation.
  double ln_total() const;
  // Shift all ln_counts so that sum exp = 2^C(n,2).
  void normalize_total();
  // Marginal over triangle counts: edge count -> summed count (exact only).
  std::map<long long, unsigned long long> edge_marginal() const;

  void to_csv(std::ostream& os, const std::string& metadata) const;
  static DensityOfStates from_csv(std::istream& is);

 private:
  int n_;
  bool exact_;
  bool converged_ = true;
  std::string normalization_ = "total";
  std::vector<DosEntry> entries_;  // sorted by (edges, triangles)
};

// Exact labelled-graph counts by (E,T) via a Gray-code walk over all
// 2^C(n,2) graphs with incremental triangle updates. n <= 7 unless forced
// (n = 8 costs 2^28 steps).
DensityOfStates exact_enumerate(int n, bool force = false);

struct Window {
  double e, t, delta;
};

struct WLConfig {
  std::uint64_t seed = 1;
  double ln_f_initial = 1.0;
  double ln_f_final = 1e-6;
  double f_reduction = 0.5;       // ln f multiplier on each flat histogram
  double flatness = 0.8;          // min bin >= flatness * mean bin
  long long max_sweeps = 2000000; // sweep = C(n,2) proposed toggles
  int check_interval = 100;       // sweeps between flatness checks
  std::optional<Window> window;   // restrict the walk to a microcanonical window
};

// Flat-histogram estimate of ln g(E,T); bins discovered on the fly,
// single-edge-toggle moves, deterministic for a fixed seed. Budget exhaustion
// is reported through the converged() flag, never silently.
DensityOfStates wang_landau(int n, const WLConfig& config);
// Average of independent walkers (seed stream per walker), merged per bin.
DensityOfStates wang_landau_merged(int n, const WLConfig& config, int walkers, int threads = 1);

// s^{n,delta}_{e,t} = ln(sum of window counts) / n^2.
double entropy_finite(const DensityOfStates& dos, double e, double t, double delta);

struct SampleConfig {
  std::uint64_t seed = 1;
  int burnin_sweeps = 200;
  int thin_sweeps = 10;
  int count = 100;
};

// Uniform samples from the microcanonical window via edge-toggle Metropolis
// (moves leaving the window are rejected). The chain starts from a graph
// thresholded from the predicted optimizer and greedily repaired into the
// window.
std::vector<SimpleGraph> sample_constrained(int n, double e, double t, double delta,
                                            const SampleConfig& config);

}  // namespace graphon_lab::ensemble

#endif
