#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

// System of rate-1 random walkers on a shared aggregate exponential clock:
// each jump picks a uniform active walker and moves it to a uniform neighbor.
// In coalescing mode a walker landing on an occupied vertex merges into the
// resident walker and is retired; in independent mode walkers pass through
// each other and per-vertex occupancy is kept as an intrusive list.
class WalkerSystem {
 public:
  enum class Mode { kIndependent, kCoalescing };

  WalkerSystem(const RegularGraph& g, std::vector<std::uint32_t> starts, Mode mode);

  const RegularGraph& graph() const { return *g_; }
  Mode mode() const { return mode_; }
  double time() const { return t_; }
  std::uint32_t walker_count() const { return static_cast<std::uint32_t>(position_.size()); }
  std::uint32_t active_count() const { return static_cast<std::uint32_t>(active_.size()); }
  bool is_active(std::uint32_t w) const { return active_slot_[w] != UINT32_MAX; }
  std::uint32_t position(std::uint32_t w) const { return position_[w]; }

  // One aggregate-clock jump; returns its time. Updates moved_walker() and,
  // in coalescing mode, merged().
  double step(Rng& rng);

  std::uint32_t moved_walker() const { return moved_; }
  bool merged() const { return merged_; }

  // Occupancy iteration: first walker at v, then successors of a walker.
  // UINT32_MAX terminates either chain.
  std::uint32_t first_at(std::uint32_t v) const { return head_[v]; }
  std::uint32_t next_of(std::uint32_t w) const { return next_[w]; }

  // Verifies the position/occupancy inversion; used by tests.
  bool check_occupancy() const;

 private:
  void occupancy_insert(std::uint32_t w);
  void occupancy_remove(std::uint32_t w);

  const RegularGraph* g_;
  Mode mode_;
  double t_ = 0.0;
  std::vector<std::uint32_t> position_;
  std::vector<std::uint32_t> active_;       // ids of active walkers
  std::vector<std::uint32_t> active_slot_;  // walker id -> index in active_, UINT32_MAX if retired
  std::vector<std::uint32_t> head_;         // vertex -> first walker, UINT32_MAX if empty
  std::vector<std::uint32_t> next_;         // walker -> next walker at same vertex
  std::vector<std::uint32_t> prev_;
  std::uint32_t moved_ = 0;
  bool merged_ = false;
};

// First meeting time of two independent rate-1 walkers started at x and y,
// checked after every jump; std::nullopt when censored at t_cap. x == y gives 0.
std::optional<double> meeting_time_pair(const RegularGraph& g, std::uint32_t x,
                                        std::uint32_t y, double t_cap, Rng& rng);

// Meeting time from two independent uniform starts (which may coincide).
std::optional<double> meeting_time_stationary(const RegularGraph& g, double t_cap, Rng& rng);

// Coalescence time from one walker per vertex down to a single survivor;
// std::nullopt when censored at t_cap.
std::optional<double> coalescence_time(const RegularGraph& g, double t_cap, Rng& rng);

// Empirical survival S(t) at each grid point; censored samples (std::nullopt)
// count as exceeding every grid entry. Grid entries must not exceed t_cap.
std::vector<std::pair<double, double>> survival_curve(
    const std::vector<std::optional<double>>& samples, double t_cap,
    const std::vector<double>& grid);

// Discrete product chain with the diagonal collapsed to a single state: from
// the diagonal the chain re-enters at a uniform directed edge, elsewhere a
// uniform coordinate moves to a uniform neighbor. Counts the diagonal visits
// of one chain started at the diagonal during steps 1..T.
std::uint32_t product_chain_visits(const RegularGraph& g, std::uint32_t T, Rng& rng);

// Estimate of the expected number of diagonal visits during steps 0..T
// (1 plus the mean count of returns at steps 1..T) over replica chains, with
// one derived stream per replica.
double product_chain_returns(const RegularGraph& g, std::uint32_t T,
                             std::uint32_t replicas, std::uint64_t seed);

// Directed edge (x, y): uniform vertex x, then uniform neighbor y. On a
// regular graph this is the uniform distribution on directed edges.
std::pair<std::uint32_t, std::uint32_t> sample_edge_nu(const RegularGraph& g, Rng& rng);

// Starting two walkers on each of the given directed edges, runs all walkers
// independently to time t and marks a pair of distinct edges as interacting
// when any two of their walkers share a vertex at a jump instant (or at the
// start). Returns the fraction of edges with at least one interaction.
double interaction_fraction_for_edges(
    const RegularGraph& g, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
    double t, Rng& rng);

// Same, with k_edges directed edges freshly sampled from nu per replica;
// returns the mean fraction over replicas.
double interaction_fraction(const RegularGraph& g, std::uint32_t k_edges, double t,
                            std::uint32_t replicas, std::uint64_t seed);

}  // namespace voterlab
