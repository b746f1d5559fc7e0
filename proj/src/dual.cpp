#include "voterlab/dual.hpp"

#include <algorithm>
#include <stdexcept>

namespace voterlab {

WalkerSystem::WalkerSystem(const RegularGraph& g, std::vector<std::uint32_t> starts, Mode mode)
    : g_(&g),
      mode_(mode),
      position_(std::move(starts)),
      head_(g.vertex_count(), UINT32_MAX),
      next_(position_.size(), UINT32_MAX),
      prev_(position_.size(), UINT32_MAX) {
  if (position_.empty()) throw std::invalid_argument("walker system needs at least one walker");
  for (std::uint32_t v : position_)
    if (v >= g.vertex_count()) throw std::invalid_argument("walker start out of range");

  active_.reserve(position_.size());
  active_slot_.assign(position_.size(), UINT32_MAX);
  for (std::uint32_t w = 0; w < position_.size(); ++w) {
    if (mode_ == Mode::kCoalescing && head_[position_[w]] != UINT32_MAX) {
      // Walkers sharing a start vertex coalesce at time zero.
      continue;
    }
    active_slot_[w] = static_cast<std::uint32_t>(active_.size());
    active_.push_back(w);
    occupancy_insert(w);
  }
}

void WalkerSystem::occupancy_insert(std::uint32_t w) {
  const std::uint32_t v = position_[w];
  next_[w] = head_[v];
  prev_[w] = UINT32_MAX;
  if (head_[v] != UINT32_MAX) prev_[head_[v]] = w;
  head_[v] = w;
}

void WalkerSystem::occupancy_remove(std::uint32_t w) {
  const std::uint32_t v = position_[w];
  if (prev_[w] != UINT32_MAX)
    next_[prev_[w]] = next_[w];
  else
    head_[v] = next_[w];
  if (next_[w] != UINT32_MAX) prev_[next_[w]] = prev_[w];
  next_[w] = UINT32_MAX;
  prev_[w] = UINT32_MAX;
}

double WalkerSystem::step(Rng& rng) {
  t_ += rng.exponential(static_cast<double>(active_.size()));
  const std::uint32_t w = active_[rng.uniform_below(static_cast<std::uint32_t>(active_.size()))];
  occupancy_remove(w);
  const std::uint32_t target = g_->neighbor(position_[w], rng.uniform_below(g_->degree()));
  position_[w] = target;
  moved_ = w;
  merged_ = false;
  if (mode_ == Mode::kCoalescing && head_[target] != UINT32_MAX) {
    // Retire the moving walker into the resident one.
    const std::uint32_t slot = active_slot_[w];
    const std::uint32_t last = active_.back();
    active_[slot] = last;
    active_slot_[last] = slot;
    active_.pop_back();
    active_slot_[w] = UINT32_MAX;
    merged_ = true;
  } else {
    occupancy_insert(w);
  }
  return t_;
}

bool WalkerSystem::check_occupancy() const {
  std::vector<char> seen(position_.size(), 0);
  for (std::uint32_t v = 0; v < head_.size(); ++v) {
    for (std::uint32_t w = head_[v]; w != UINT32_MAX; w = next_[w]) {
      if (position_[w] != v || seen[w] || !is_active(w)) return false;
      seen[w] = 1;
    }
  }
  for (std::uint32_t w = 0; w < position_.size(); ++w)
    if (is_active(w) != static_cast<bool>(seen[w])) return false;
  if (mode_ == Mode::kCoalescing) {
    for (std::uint32_t v = 0; v < head_.size(); ++v)
      if (head_[v] != UINT32_MAX && next_[head_[v]] != UINT32_MAX) return false;
  }
  return true;
}

std::optional<double> meeting_time_pair(const RegularGraph& g, std::uint32_t x,
                                        std::uint32_t y, double t_cap, Rng& rng) {
  if (x >= g.vertex_count() || y >= g.vertex_count())
    throw std::invalid_argument("vertex out of range");
  if (t_cap < 0.0) throw std::invalid_argument("t_cap must be non-negative");
  if (x == y) return 0.0;
  double t = 0.0;
  while (true) {
    t += rng.exponential(2.0);
    if (t > t_cap) return std::nullopt;
    const std::uint32_t mover = static_cast<std::uint32_t>(rng.next_u64() & 1u);
    if (mover == 0)
      x = g.neighbor(x, rng.uniform_below(g.degree()));
    else
      y = g.neighbor(y, rng.uniform_below(g.degree()));
    if (x == y) return t;
  }
}

std::optional<double> meeting_time_stationary(const RegularGraph& g, double t_cap, Rng& rng) {
  const std::uint32_t x = rng.uniform_below(g.vertex_count());
  const std::uint32_t y = rng.uniform_below(g.vertex_count());
  return meeting_time_pair(g, x, y, t_cap, rng);
}

std::optional<double> coalescence_time(const RegularGraph& g, double t_cap, Rng& rng) {
  if (t_cap < 0.0) throw std::invalid_argument("t_cap must be non-negative");
  std::vector<std::uint32_t> starts(g.vertex_count());
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) starts[v] = v;
  WalkerSystem sys(g, std::move(starts), WalkerSystem::Mode::kCoalescing);
  while (sys.active_count() > 1) {
    if (sys.step(rng) > t_cap) return std::nullopt;
  }
  return sys.time();
}

std::vector<std::pair<double, double>> survival_curve(
    const std::vector<std::optional<double>>& samples, double t_cap,
    const std::vector<double>& grid) {
  if (samples.empty()) throw std::invalid_argument("survival_curve needs samples");
  for (double t : grid)
    if (t > t_cap) throw std::invalid_argument("grid entry beyond t_cap");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid.size());
  for (double t : grid) {
    std::size_t exceed = 0;
    for (const auto& s : samples) exceed += !s.has_value() || *s > t;
    curve.emplace_back(t, static_cast<double>(exceed) / samples.size());
  }
  return curve;
}

std::uint32_t product_chain_visits(const RegularGraph& g, std::uint32_t T, Rng& rng) {
  std::uint32_t visits = 0;
  bool at_diagonal = true;
  std::uint32_t a = 0;
  std::uint32_t b = 0;
  for (std::uint32_t s = 0; s < T; ++s) {
    if (at_diagonal) {
      a = rng.uniform_below(g.vertex_count());
      b = g.neighbor(a, rng.uniform_below(g.degree()));
      at_diagonal = false;
    } else {
      if (rng.next_u64() & 1u)
        a = g.neighbor(a, rng.uniform_below(g.degree()));
      else
        b = g.neighbor(b, rng.uniform_below(g.degree()));
      if (a == b) {
        at_diagonal = true;
        ++visits;
      }
    }
  }
  return visits;
}

double product_chain_returns(const RegularGraph& g, std::uint32_t T,
                             std::uint32_t replicas, std::uint64_t seed) {
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  std::uint64_t total = 0;
  for (std::uint32_t r = 0; r < replicas; ++r) {
    Rng rng = Rng::for_stream(seed, r);
    total += product_chain_visits(g, T, rng);
  }
  return 1.0 + static_cast<double>(total) / replicas;
}

std::pair<std::uint32_t, std::uint32_t> sample_edge_nu(const RegularGraph& g, Rng& rng) {
  const std::uint32_t x = rng.uniform_below(g.vertex_count());
  return {x, g.neighbor(x, rng.uniform_below(g.degree()))};
}

double interaction_fraction_for_edges(
    const RegularGraph& g, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    double t, Rng& rng) {
  if (edges.empty()) throw std::invalid_argument("interaction check needs edges");
  if (t < 0.0) throw std::invalid_argument("t must be non-negative");
  std::vector<std::uint32_t> starts;
  starts.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.first >= g.vertex_count() || e.second >= g.vertex_count())
      throw std::invalid_argument("edge endpoint out of range");
    starts.push_back(e.first);
    starts.push_back(e.second);
  }
  WalkerSystem sys(g, starts, WalkerSystem::Mode::kIndependent);
  std::vector<char> interacted(edges.size(), 0);

  // Walker w belongs to edge w / 2.
  const auto mark_collisions_at = [&](std::uint32_t w) {
    const std::uint32_t e = w / 2;
    for (std::uint32_t o = sys.first_at(sys.position(w)); o != UINT32_MAX; o = sys.next_of(o)) {
      if (o == w || o / 2 == e) continue;
      interacted[e] = 1;
      interacted[o / 2] = 1;
    }
  };
  for (std::uint32_t w = 0; w < sys.walker_count(); ++w) mark_collisions_at(w);

  while (true) {
    // Peek-free loop: the jump either lands within [0, t] or ends the run.
    if (sys.step(rng) > t) break;
    mark_collisions_at(sys.moved_walker());
  }
  std::size_t hits = 0;
  for (char c : interacted) hits += c;
  return static_cast<double>(hits) / edges.size();
}

double interaction_fraction(const RegularGraph& g, std::uint32_t k_edges, double t,
                            std::uint32_t replicas, std::uint64_t seed) {
  if (k_edges == 0 || replicas == 0)
    throw std::invalid_argument("k_edges and replicas must be positive");
  double total = 0.0;
  for (std::uint32_t r = 0; r < replicas; ++r) {
    Rng rng = Rng::for_stream(seed, r);
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges(k_edges);
    for (auto& e : edges) e = sample_edge_nu(g, rng);
    total += interaction_fraction_for_edges(g, edges, t, rng);
  }
  return total / replicas;
}

}  // namespace voterlab
