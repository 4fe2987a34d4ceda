#ifndef GRAPHON_LAB_STEP_GRAPHON_HPP
#define GRAPHON_LAB_STEP_GRAPHON_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace graphon_lab {

// Piecewise-constant symmetric kernel on [0,1]^2. Blocks are the products of
// consecutive boundary intervals; every analytic optimizer in this project is
// a step function, so all integrals over these objects are finite sums.
//
// Invariants enforced at construction:
//   * boundaries strictly increasing, first element 0, last element 1
//   * values matrix square, matching the block count, exactly symmetric
//   * every value in [0,1]
class StepGraphon {
 public:
  StepGraphon(std::vector<double> boundaries, std::vector<std::vector<double>> values);

  static StepGraphon constant(double u);
  // m equal-width blocks, values row-major (must be symmetric).
  static StepGraphon equal_blocks(std::size_t m, const std::vector<double>& values_row_major);

  std::size_t num_blocks() const { return m_; }
  const std::vector<double>& boundaries() const { return boundaries_; }
  double width(std::size_t i) const { return boundaries_[i + 1] - boundaries_[i]; }
  double value(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
  // Point evaluation; x,y in [0,1], boundary convention: block i owns [b_i, b_{i+1}).
  double value_at(double x, double y) const;

  // Same kernel on a finer partition. `finer` must contain every existing
  // boundary (within 1e-12); values are copied into the sub-blocks.
  StepGraphon refined(const std::vector<double>& finer) const;
  // L2 projection onto m equal-width blocks (area-weighted block averages).
  StepGraphon resampled(std::size_t m) const;
  // Relabel blocks: block k of the result is block perm[k] of *this, carrying
  // its width. A measure-preserving rearrangement, so all densities persist.
  StepGraphon permuted(const std::vector<std::size_t>& perm) const;

  bool same_partition(const StepGraphon& other, double tol = 1e-12) const;

  nlohmann::json to_json() const;
  static StepGraphon from_json(const nlohmann::json& j);

 private:
  std::size_t m_;
  std::vector<double> boundaries_;  // size m_+1
  std::vector<double> values_;      // row-major m_ x m_
};

// Sorted union of two boundary sets (near-duplicates within 1e-12 merged).
std::vector<double> merged_boundaries(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace graphon_lab

#endif
