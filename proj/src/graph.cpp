#include "voterlab/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "voterlab/rng.hpp"

namespace voterlab {

namespace {

void check_parameters(std::uint32_t n, std::uint32_t d) {
  if (n < 4) throw std::invalid_argument("vertex count must be at least 4");
  if (d < 3) throw std::invalid_argument("degree must be at least 3");
  if (d >= n) throw std::invalid_argument("degree must be smaller than the vertex count");
  if ((static_cast<std::uint64_t>(n) * d) % 2 != 0)
    throw std::invalid_argument("n * d must be even for a d-regular graph");
}

// Union-find over 0..size-1 with path halving.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t size) : parent_(size) {
    for (std::size_t i = 0; i < size; ++i) parent_[i] = static_cast<std::uint32_t>(i);
  }

  std::uint32_t find(std::uint32_t v) {
    while (parent_[v] != v) {
      parent_[v] = parent_[parent_[v]];
      v = parent_[v];
    }
    return v;
  }

  void unite(std::uint32_t a, std::uint32_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::uint32_t> parent_;
};

// Collects vertices within the radius of any seed vertex, then the induced edges.
Subgraph induced_ball(const RegularGraph& g, const std::vector<std::uint32_t>& seeds,
                      std::uint32_t radius) {
  std::vector<std::uint32_t> depth(g.vertex_count(), UINT32_MAX);
  std::queue<std::uint32_t> frontier;
  Subgraph s;
  for (std::uint32_t v : seeds) {
    if (depth[v] != UINT32_MAX) continue;
    depth[v] = 0;
    frontier.push(v);
    s.vertices.push_back(v);
  }
  while (!frontier.empty()) {
    const std::uint32_t v = frontier.front();
    frontier.pop();
    if (depth[v] == radius) continue;
    const std::uint32_t* nb = g.neighbors(v);
    for (std::uint32_t i = 0; i < g.degree(); ++i) {
      const std::uint32_t w = nb[i];
      if (depth[w] != UINT32_MAX) continue;
      depth[w] = depth[v] + 1;
      frontier.push(w);
      s.vertices.push_back(w);
    }
  }
  std::sort(s.vertices.begin(), s.vertices.end());
  for (std::uint32_t v : s.vertices) {
    const std::uint32_t* nb = g.neighbors(v);
    for (std::uint32_t i = 0; i < g.degree(); ++i) {
      const std::uint32_t w = nb[i];
      if (v < w && depth[w] != UINT32_MAX) s.edges.emplace_back(v, w);
    }
  }
  return s;
}

}  // namespace

RegularGraph::RegularGraph(std::uint32_t n, std::uint32_t d, std::vector<Edge> edges)
    : n_(n), d_(d), edges_(std::move(edges)) {
  check_parameters(n, d);
  const std::size_t expected = static_cast<std::size_t>(n) * d / 2;
  if (edges_.size() != expected)
    throw std::invalid_argument("edge count does not match n * d / 2");
  for (const Edge& e : edges_) {
    if (e.first >= n || e.second >= n)
      throw std::invalid_argument("edge endpoint out of range");
    if (e.first == e.second) throw std::invalid_argument("self-loop in edge list");
    if (e.first > e.second) throw std::invalid_argument("edge endpoints must satisfy u < v");
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end())
    throw std::invalid_argument("duplicate edge in edge list");

  adjacency_.assign(static_cast<std::size_t>(n) * d, 0);
  std::vector<std::uint32_t> fill(n, 0);
  for (const Edge& e : edges_) {
    if (fill[e.first] >= d || fill[e.second] >= d)
      throw std::invalid_argument("vertex degree exceeds d");
    adjacency_[static_cast<std::size_t>(e.first) * d + fill[e.first]++] = e.second;
    adjacency_[static_cast<std::size_t>(e.second) * d + fill[e.second]++] = e.first;
  }
  for (std::uint32_t v = 0; v < n; ++v)
    if (fill[v] != d) throw std::invalid_argument("vertex degree below d");
}

RegularGraph generate_regular(std::uint32_t n, std::uint32_t d, std::uint64_t seed) {
  check_parameters(n, d);
  constexpr int kMaxAttempts = 10000;
  Rng rng(seed);

  const std::size_t stub_count = static_cast<std::size_t>(n) * d;
  std::vector<std::uint32_t> stubs(stub_count);
  std::vector<RegularGraph::Edge> edges;
  std::vector<std::uint64_t> keys;
  edges.reserve(stub_count / 2);
  keys.reserve(stub_count / 2);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (std::size_t i = 0; i < stub_count; ++i)
      stubs[i] = static_cast<std::uint32_t>(i / d);
    for (std::size_t i = stub_count - 1; i > 0; --i) {
      const std::size_t j = rng.uniform_below(static_cast<std::uint32_t>(i + 1));
      std::swap(stubs[i], stubs[j]);
    }

    edges.clear();
    keys.clear();
    bool simple = true;
    for (std::size_t i = 0; i < stub_count; i += 2) {
      std::uint32_t u = stubs[i];
      std::uint32_t v = stubs[i + 1];
      if (u == v) {
        simple = false;
        break;
      }
      if (u > v) std::swap(u, v);
      edges.emplace_back(u, v);
      keys.push_back((static_cast<std::uint64_t>(u) << 32) | v);
    }
    if (!simple) continue;
    std::sort(keys.begin(), keys.end());
    if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) continue;
    return RegularGraph(n, d, std::move(edges));
  }
  throw std::runtime_error("regular graph generation did not produce a simple graph in 10000 attempts");
}

std::optional<std::uint32_t> distance(const RegularGraph& g, std::uint32_t x, std::uint32_t y) {
  if (x >= g.vertex_count() || y >= g.vertex_count())
    throw std::invalid_argument("vertex out of range");
  if (x == y) return 0;
  std::vector<std::uint32_t> dist(g.vertex_count(), UINT32_MAX);
  std::queue<std::uint32_t> frontier;
  dist[x] = 0;
  frontier.push(x);
  while (!frontier.empty()) {
    const std::uint32_t v = frontier.front();
    frontier.pop();
    const std::uint32_t* nb = g.neighbors(v);
    for (std::uint32_t i = 0; i < g.degree(); ++i) {
      const std::uint32_t w = nb[i];
      if (dist[w] != UINT32_MAX) continue;
      dist[w] = dist[v] + 1;
      if (w == y) return dist[w];
      frontier.push(w);
    }
  }
  return std::nullopt;
}

bool is_connected(const RegularGraph& g) {
  std::vector<char> seen(g.vertex_count(), 0);
  std::queue<std::uint32_t> frontier;
  seen[0] = 1;
  frontier.push(0);
  std::uint32_t reached = 1;
  while (!frontier.empty()) {
    const std::uint32_t v = frontier.front();
    frontier.pop();
    const std::uint32_t* nb = g.neighbors(v);
    for (std::uint32_t i = 0; i < g.degree(); ++i) {
      const std::uint32_t w = nb[i];
      if (seen[w]) continue;
      seen[w] = 1;
      ++reached;
      frontier.push(w);
    }
  }
  return reached == g.vertex_count();
}

Subgraph ball(const RegularGraph& g, std::uint32_t x, std::uint32_t radius) {
  if (x >= g.vertex_count()) throw std::invalid_argument("vertex out of range");
  return induced_ball(g, {x}, radius);
}

Subgraph ball_union(const RegularGraph& g, std::uint32_t x, std::uint32_t y, std::uint32_t radius) {
  if (x >= g.vertex_count() || y >= g.vertex_count())
    throw std::invalid_argument("vertex out of range");
  return induced_ball(g, {x, y}, radius);
}

std::uint64_t tree_excess(const Subgraph& s) {
  DisjointSets sets(s.vertices.size());
  const auto index_of = [&s](std::uint32_t v) {
    const auto it = std::lower_bound(s.vertices.begin(), s.vertices.end(), v);
    if (it == s.vertices.end() || *it != v)
      throw std::invalid_argument("subgraph edge endpoint missing from vertex list");
    return static_cast<std::uint32_t>(it - s.vertices.begin());
  };
  for (const auto& e : s.edges) sets.unite(index_of(e.first), index_of(e.second));
  std::uint64_t components = 0;
  for (std::uint32_t i = 0; i < s.vertices.size(); ++i)
    if (sets.find(i) == i) ++components;
  return s.edges.size() - s.vertices.size() + components;
}

bool is_ltl_vertex(const RegularGraph& g, std::uint32_t x, std::uint32_t radius) {
  if (radius < 1) throw std::invalid_argument("radius must be at least 1");
  return tree_excess(ball(g, x, radius)) == 0;
}

bool is_ltle_edge(const RegularGraph& g, const RegularGraph::Edge& e, std::uint32_t radius) {
  if (radius < 1) throw std::invalid_argument("radius must be at least 1");
  if (e.first >= e.second || e.second >= g.vertex_count())
    throw std::invalid_argument("edge endpoints must satisfy u < v within range");
  const std::uint32_t* nb = g.neighbors(e.first);
  if (std::find(nb, nb + g.degree(), e.second) == nb + g.degree())
    throw std::invalid_argument("not an edge of the graph");
  const Subgraph s = ball_union(g, e.first, e.second, radius);
  DisjointSets sets(s.vertices.size());
  const auto index_of = [&s](std::uint32_t v) {
    const auto it = std::lower_bound(s.vertices.begin(), s.vertices.end(), v);
    return static_cast<std::uint32_t>(it - s.vertices.begin());
  };
  std::size_t kept_edges = 0;
  for (const auto& f : s.edges) {
    if (f == e) continue;
    sets.unite(index_of(f.first), index_of(f.second));
    ++kept_edges;
  }
  std::uint64_t components = 0;
  for (std::uint32_t i = 0; i < s.vertices.size(); ++i)
    if (sets.find(i) == i) ++components;
  const bool two_trees = components == 2 && kept_edges + components == s.vertices.size();
  return two_trees && sets.find(index_of(e.first)) != sets.find(index_of(e.second));
}

void save_graph(const RegularGraph& g, std::ostream& out) {
  out << g.vertex_count() << ' ' << g.degree() << '\n';
  for (const auto& e : g.edges()) out << e.first << ' ' << e.second << '\n';
  if (!out) throw std::runtime_error("failed writing graph");
}

void save_graph(const RegularGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_graph(g, out);
}

RegularGraph load_graph(std::istream& in) {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  if (!(in >> n >> d)) throw std::runtime_error("graph header must be 'n d'");
  check_parameters(n, d);
  const std::size_t expected = static_cast<std::size_t>(n) * d / 2;
  std::vector<RegularGraph::Edge> edges;
  edges.reserve(expected);
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  while (in >> u >> v) edges.emplace_back(u, v);
  if (edges.size() != expected) {
    std::ostringstream msg;
    msg << "expected " << expected << " edges, found " << edges.size();
    throw std::runtime_error(msg.str());
  }
  try {
    return RegularGraph(n, d, std::move(edges));
  } catch (const std::invalid_argument& err) {
    throw std::runtime_error(std::string("invalid graph file: ") + err.what());
  }
}

RegularGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_graph(in);
}

}  // namespace voterlab
