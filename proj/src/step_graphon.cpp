#include "graphon_lab/step_graphon.hpp"

#include <algorithm>
#include <cmath>

#include "graphon_lab/errors.hpp"

namespace graphon_lab {

StepGraphon::StepGraphon(std::vector<double> boundaries, std::vector<std::vector<double>> values)
    : m_(values.size()), boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2 || m_ + 1 != boundaries_.size())
    throw DomainError("StepGraphon: boundaries/values size mismatch");
  if (boundaries_.front() != 0.0 || boundaries_.back() != 1.0)
    throw DomainError("StepGraphon: boundaries must start at 0 and end at 1");
  for (std::size_t i = 0; i + 1 < boundaries_.size(); ++i)
    if (!(boundaries_[i] < boundaries_[i + 1]))
      throw DomainError("StepGraphon: boundaries must be strictly increasing");
  values_.resize(m_ * m_);
  for (std::size_t i = 0; i < m_; ++i) {
    if (values[i].size() != m_) throw DomainError("StepGraphon: values matrix not square");
    for (std::size_t j = 0; j < m_; ++j) {
      double v = values[i][j];
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("StepGraphon: value outside [0,1]");
      values_[i * m_ + j] = v;
    }
  }
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t j = i + 1; j < m_; ++j)
      if (values_[i * m_ + j] != values_[j * m_ + i])
        throw DomainError("StepGraphon: values matrix not symmetric");
}

StepGraphon StepGraphon::constant(double u) {
  return StepGraphon({0.0, 1.0}, {{u}});
}

StepGraphon StepGraphon::equal_blocks(std::size_t m, const std::vector<double>& values_row_major) {
  if (m == 0 || values_row_major.size() != m * m)
    throw DomainError("StepGraphon::equal_blocks: bad value count");
  std::vector<double> b(m + 1);
  for (std::size_t i = 0; i <= m; ++i) b[i] = static_cast<double>(i) / static_cast<double>(m);
  b[m] = 1.0;
  std::vector<std::vector<double>> rows(m, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) rows[i][j] = values_row_major[i * m + j];
  return StepGraphon(std::move(b), std::move(rows));
}

double StepGraphon::value_at(double x, double y) const {
  auto block_of = [&](double z) -> std::size_t {
    if (z >= 1.0) return m_ - 1;
    auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), z);
    std::size_t idx = static_cast<std::size_t>(it - boundaries_.begin());
    return idx == 0 ? 0 : idx - 1;
  };
  return value(block_of(x), block_of(y));
}

std::vector<double> merged_boundaries(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double x : all)
    if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
  out.front() = 0.0;
  out.back() = 1.0;
  return out;
}

StepGraphon StepGraphon::refined(const std::vector<double>& finer) const {
  // Every old boundary must appear in the new list.
  for (double bnd : boundaries_) {
    bool found = false;
    for (double f : finer)
      if (std::abs(f - bnd) <= 1e-12) { found = true; break; }
    if (!found) throw DomainError("StepGraphon::refined: missing original boundary");
  }
  std::size_t mf = finer.size() - 1;
  std::vector<std::vector<double>> vals(mf, std::vector<double>(mf));
  std::vector<std::size_t> owner(mf);
  for (std::size_t i = 0; i < mf; ++i) {
    double mid = 0.5 * (finer[i] + finer[i + 1]);
    std::size_t k = 0;
    while (k + 1 < m_ && boundaries_[k + 1] <= mid) ++k;
    owner[i] = k;
  }
  for (std::size_t i = 0; i < mf; ++i)
    for (std::size_t j = 0; j < mf; ++j) vals[i][j] = value(owner[i], owner[j]);
  std::vector<double> fb = finer;
  return StepGraphon(std::move(fb), std::move(vals));
}

StepGraphon StepGraphon::resampled(std::size_t m) const {
  if (m == 0) throw DomainError("StepGraphon::resampled: m must be positive");
  double w = 1.0 / static_cast<double>(m);
  // Overlap of target cell [kw,(k+1)w] with source block i, per axis.
  std::vector<std::vector<double>> overlap(m, std::vector<double>(m_, 0.0));
  for (std::size_t k = 0; k < m; ++k) {
    double lo = k * w, hi = (k + 1) * w;
    for (std::size_t i = 0; i < m_; ++i) {
      double l = std::max(lo, boundaries_[i]), h = std::min(hi, boundaries_[i + 1]);
      if (h > l) overlap[k][i] = h - l;
    }
  }
  std::vector<std::vector<double>> vals(m, std::vector<double>(m, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a; b < m; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        if (overlap[a][i] == 0.0) continue;
        for (std::size_t j = 0; j < m_; ++j) {
          if (overlap[b][j] == 0.0) continue;
          s += overlap[a][i] * overlap[b][j] * value(i, j);
        }
      }
      double v = s / (w * w);
      v = std::min(1.0, std::max(0.0, v));
      vals[a][b] = vals[b][a] = v;
    }
  std::vector<double> bnd(m + 1);
  for (std::size_t i = 0; i <= m; ++i) bnd[i] = static_cast<double>(i) / static_cast<double>(m);
  bnd[m] = 1.0;
  return StepGraphon(std::move(bnd), std::move(vals));
}

StepGraphon StepGraphon::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != m_) throw DomainError("StepGraphon::permuted: bad permutation size");
  std::vector<double> b(m_ + 1);
  b[0] = 0.0;
  for (std::size_t k = 0; k < m_; ++k) b[k + 1] = b[k] + width(perm[k]);
  b[m_] = 1.0;
  std::vector<std::vector<double>> vals(m_, std::vector<double>(m_));
  for (std::size_t a = 0; a < m_; ++a)
    for (std::size_t c = 0; c < m_; ++c) vals[a][c] = value(perm[a], perm[c]);
  return StepGraphon(std::move(b), std::move(vals));
}

bool StepGraphon::same_partition(const StepGraphon& other, double tol) const {
  if (other.m_ != m_) return false;
  for (std::size_t i = 0; i <= m_; ++i)
    if (std::abs(boundaries_[i] - other.boundaries_[i]) > tol) return false;
  return true;
}

nlohmann::json StepGraphon::to_json() const {
  nlohmann::json j;
  j["boundaries"] = boundaries_;
  std::vector<std::vector<double>> rows(m_, std::vector<double>(m_));
  for (std::size_t i = 0; i < m_; ++i)
    for (std::size_t k = 0; k < m_; ++k) rows[i][k] = value(i, k);
  j["values"] = rows;
  return j;
}

StepGraphon StepGraphon::from_json(const nlohmann::json& j) {
  return StepGraphon(j.at("boundaries").get<std::vector<double>>(),
                     j.at("values").get<std::vector<std::vector<double>>>());
}

}  // namespace graphon_lab
