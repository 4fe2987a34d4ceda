#ifndef GRAPHON_LAB_SIMPLE_GRAPH_HPP
#define GRAPHON_LAB_SIMPLE_GRAPH_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

namespace graphon_lab {

// Labelled simple graph with bitset adjacency rows. No loops, symmetric.
// Vertices are 0-indexed in the API; the JSON edge-list interchange format is
// 1-indexed.
class SimpleGraph {
 public:
  explicit SimpleGraph(int n);
  static SimpleGraph complete(int n);
  static SimpleGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

  int n() const { return n_; }
  bool has_edge(int i, int j) const;
  void set_edge(int i, int j, bool present);
  void toggle_edge(int i, int j);

  long long edge_count() const;
  long long triangle_count() const;
  int degree(int i) const;
  int common_neighbors(int i, int j) const;

  // Effect of toggling (i,j) without mutating the graph:
  // (delta_edges, delta_triangles); delta_triangles = +-(common neighbors).
  std::pair<int, long long> toggle_edge_delta(int i, int j) const;

  std::vector<std::pair<int, int>> edges() const;

  nlohmann::json to_json() const;                      // {"n":N,"edges":[[1-indexed],...]}
  static SimpleGraph from_json(const nlohmann::json&);

 private:
  void check_pair(int i, int j) const;
  int n_;
  int words_;
  std::vector<std::uint64_t> rows_;  // n_ rows of `words_` 64-bit words
};

// Small pattern graph used as H in homomorphism densities; at most 8 vertices.
class Motif {
 public:
  explicit Motif(SimpleGraph g);
  const SimpleGraph& graph() const { return graph_; }

 private:
  SimpleGraph graph_;
};

// Fixed motif family used as the default truncation of the countable
// hom-metric family: all connected simple graphs on 2..4 vertices, in the
// documented order edge, path3, triangle, path4, star3, cycle4, paw, diamond,
// complete4. Weights in the metric are 2^-1 ... 2^-9 in this order.
const std::vector<Motif>& default_motifs();

namespace motifs {
Motif edge();
Motif path(int vertices);
Motif cycle(int vertices);
Motif complete(int vertices);
Motif star(int leaves);
Motif paw();      // triangle plus a pendant edge
Motif diamond();  // complete4 minus one edge
}  // namespace motifs

}  // namespace graphon_lab

#endif
