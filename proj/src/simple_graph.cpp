#include "graphon_lab/simple_graph.hpp"

#include <bit>

#include "graphon_lab/errors.hpp"

namespace graphon_lab {

SimpleGraph::SimpleGraph(int n) : n_(n) {
  if (n <= 0) throw DomainError("SimpleGraph: vertex count must be positive");
  words_ = (n + 63) / 64;
  rows_.assign(static_cast<std::size_t>(n_) * words_, 0ull);
}

SimpleGraph SimpleGraph::complete(int n) {
  SimpleGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.set_edge(i, j, true);
  return g;
}

SimpleGraph SimpleGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  SimpleGraph g(n);
  for (auto [i, j] : edges) g.set_edge(i, j, true);
  return g;
}

void SimpleGraph::check_pair(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) throw DomainError("SimpleGraph: vertex out of range");
  if (i == j) throw DomainError("SimpleGraph: invalid edge (i == j)");
}

bool SimpleGraph::has_edge(int i, int j) const {
  check_pair(i, j);
  return (rows_[static_cast<std::size_t>(i) * words_ + j / 64] >> (j % 64)) & 1ull;
}

void SimpleGraph::set_edge(int i, int j, bool present) {
  check_pair(i, j);
  std::uint64_t bi = 1ull << (j % 64), bj = 1ull << (i % 64);
  auto* ri = &rows_[static_cast<std::size_t>(i) * words_];
  auto* rj = &rows_[static_cast<std::size_t>(j) * words_];
  if (present) {
    ri[j / 64] |= bi;
    rj[i / 64] |= bj;
  } else {
    ri[j / 64] &= ~bi;
    rj[i / 64] &= ~bj;
  }
}

void SimpleGraph::toggle_edge(int i, int j) { set_edge(i, j, !has_edge(i, j)); }

int SimpleGraph::degree(int i) const {
  int d = 0;
  for (int w = 0; w < words_; ++w)
    d += std::popcount(rows_[static_cast<std::size_t>(i) * words_ + w]);
  return d;
}

long long SimpleGraph::edge_count() const {
  long long total = 0;
  for (int i = 0; i < n_; ++i) total += degree(i);
  return total / 2;
}

int SimpleGraph::common_neighbors(int i, int j) const {
  check_pair(i, j);
  int c = 0;
  const auto* ri = &rows_[static_cast<std::size_t>(i) * words_];
  const auto* rj = &rows_[static_cast<std::size_t>(j) * words_];
  for (int w = 0; w < words_; ++w) c += std::popcount(ri[w] & rj[w]);
  return c;
}

long long SimpleGraph::triangle_count() const {
  // Sum of common neighbors over edges counts each triangle three times.
  long long s = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has_edge(i, j)) s += common_neighbors(i, j);
  return s / 3;
}

std::pair<int, long long> SimpleGraph::toggle_edge_delta(int i, int j) const {
  check_pair(i, j);
  long long tri = common_neighbors(i, j);
  if (has_edge(i, j)) return {-1, -tri};
  return {+1, tri};
}

std::vector<std::pair<int, int>> SimpleGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (has_edge(i, j)) out.emplace_back(i, j);
  return out;
}

nlohmann::json SimpleGraph::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  auto es = nlohmann::json::array();
  for (auto [a, b] : edges()) es.push_back({a + 1, b + 1});
  j["edges"] = es;
  return j;
}

SimpleGraph SimpleGraph::from_json(const nlohmann::json& j) {
  SimpleGraph g(j.at("n").get<int>());
  for (const auto& e : j.at("edges")) {
    int a = e.at(0).get<int>(), b = e.at(1).get<int>();
    g.set_edge(a - 1, b - 1, true);
  }
  return g;
}

Motif::Motif(SimpleGraph g) : graph_(std::move(g)) {
  if (graph_.n() > 8) throw DomainError("Motif: at most 8 vertices");
}

namespace motifs {

Motif edge() { return Motif(SimpleGraph::from_edges(2, {{0, 1}})); }

Motif path(int vertices) {
  SimpleGraph g(vertices);
  for (int i = 0; i + 1 < vertices; ++i) g.set_edge(i, i + 1, true);
  return Motif(std::move(g));
}

Motif cycle(int vertices) {
  if (vertices < 3) throw DomainError("cycle motif needs >= 3 vertices");
  SimpleGraph g(vertices);
  for (int i = 0; i < vertices; ++i) g.set_edge(i, (i + 1) % vertices, true);
  return Motif(std::move(g));
}

Motif complete(int vertices) { return Motif(SimpleGraph::complete(vertices)); }

Motif star(int leaves) {
  SimpleGraph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.set_edge(0, i, true);
  return Motif(std::move(g));
}

Motif paw() { return Motif(SimpleGraph::from_edges(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}})); }

Motif diamond() {
  return Motif(SimpleGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}}));
}

}  // namespace motifs

const std::vector<Motif>& default_motifs() {
  static const std::vector<Motif> fam = {
      motifs::edge(),     motifs::path(3),  motifs::complete(3),
      motifs::path(4),    motifs::star(3),  motifs::cycle(4),
      motifs::paw(),      motifs::diamond(), motifs::complete(4)};
  return fam;
}

}  // namespace graphon_lab
