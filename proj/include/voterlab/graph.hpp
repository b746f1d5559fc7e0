#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace voterlab {

// Simple d-regular graph, vertices 0..n-1, edges stored as (u, v) with u < v
// in sorted order. Adjacency is a flat n*d block for cheap neighbor draws.
class RegularGraph {
 public:
  using Edge = std::pair<std::uint32_t, std::uint32_t>;

  // Validates regularity, simplicity and the (n, d) constraints; throws
  // std::invalid_argument on violation.
  RegularGraph(std::uint32_t n, std::uint32_t d, std::vector<Edge> edges);

  std::uint32_t vertex_count() const { return n_; }
  std::uint32_t degree() const { return d_; }
  std::uint32_t edge_count() const { return static_cast<std::uint32_t>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbors of v as a contiguous block of length degree().
  const std::uint32_t* neighbors(std::uint32_t v) const {
    return adjacency_.data() + static_cast<std::size_t>(v) * d_;
  }
  std::uint32_t neighbor(std::uint32_t v, std::uint32_t i) const {
    return adjacency_[static_cast<std::size_t>(v) * d_ + i];
  }

 private:
  std::uint32_t n_;
  std::uint32_t d_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> adjacency_;
};

// Vertex-induced piece of a host graph: sorted unique vertices plus the
// induced edges (u < v). tree_excess() relies on both lists being consistent.
struct Subgraph {
  std::vector<std::uint32_t> vertices;
  std::vector<RegularGraph::Edge> edges;
};

// Uniform simple d-regular graph via the configuration model: random stub
// matching, full restart on any self-loop or parallel edge, at most 10000
// attempts before throwing std::runtime_error. Pure function of (n, d, seed).
RegularGraph generate_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed);

// BFS graph distance; std::nullopt when y is unreachable from x.
std::optional<std::uint32_t> distance(const RegularGraph& g, std::uint32_t x, std::uint32_t y);

bool is_connected(const RegularGraph& g);

// Induced subgraph on all vertices within the given radius of x.
Subgraph ball(const RegularGraph& g, std::uint32_t x, std::uint32_t radius);

// Induced subgraph on the union of the two balls of the given radius.
Subgraph ball_union(const RegularGraph& g, std::uint32_t x, std::uint32_t y, std::uint32_t radius);

// |E| - |V| + #components; zero exactly when every component is a tree.
std::uint64_t tree_excess(const Subgraph& s);

// Vertex whose radius-ell ball is a tree.
bool is_ltl_vertex(const RegularGraph& g, std::uint32_t x, std::uint32_t radius);

// Edge {x, y} such that the union of the two radius-ell balls minus the edge
// itself splits into two disjoint trees, one holding x and one holding y.
bool is_ltle_edge(const RegularGraph& g, const RegularGraph::Edge& e, std::uint32_t radius);

// Text format: one "n d" header line, then one "u v" line per edge with
// u < v. save_graph emits edges in sorted order so output is canonical.
void save_graph(const RegularGraph& g, std::ostream& out);
void save_graph(const RegularGraph& g, const std::string& path);
RegularGraph load_graph(std::istream& in);
RegularGraph load_graph(const std::string& path);

}  // namespace voterlab
