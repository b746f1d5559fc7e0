#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voterlab/graph.hpp"
#include "voterlab/rng.hpp"

namespace voterlab {

// Two-opinion voter configuration driven by an aggregate exponential clock of
// rate n: at each event a uniform vertex adopts the opinion of a uniform
// neighbor. The ones and discordant-edge counters are maintained by scanning
// only the updated vertex's d neighbors.
class VoterState {
 public:
  // Bernoulli(u) iid initial opinions.
  VoterState(const RegularGraph& g, double u, std::uint64_t seed);

  // Explicit 0/1 initial opinions, one entry per vertex.
  VoterState(const RegularGraph& g, const std::vector<std::uint8_t>& opinions,
             std::uint64_t seed);

  const RegularGraph& graph() const { return *g_; }
  double time() const { return t_; }
  // Scheduled time of the next copy event; +inf once at consensus.
  double next_event_time() const { return next_event_; }
  std::uint32_t ones_count() const { return ones_; }
  std::uint32_t discordant_count() const { return discordant_; }
  double b_density() const { return static_cast<double>(ones_) / g_->vertex_count(); }
  double d_density() const { return static_cast<double>(discordant_) / g_->edge_count(); }
  bool at_consensus() const { return discordant_ == 0; }
  const std::vector<std::uint8_t>& opinions() const { return opinions_; }
  std::uint64_t seed() const { return seed_; }
  // Bernoulli density the run started from; NaN after explicit init.
  double init_u() const { return init_u_; }

  // Applies every event with time <= t, then sets the clock to t.
  void advance_to(double t);

  // Runs event by event until consensus, at most to t_cap. Returns the exact
  // time of the event that reached consensus, or std::nullopt when censored.
  std::optional<double> run_until_consensus(double t_cap);

 private:
  void init_counters();
  void apply_event();

  const RegularGraph* g_;
  std::uint64_t seed_;
  double init_u_;
  Rng rng_;
  std::vector<std::uint8_t> opinions_;
  std::uint32_t ones_ = 0;
  std::uint32_t discordant_ = 0;
  double t_ = 0.0;
  double next_event_ = 0.0;
};

struct TrajectorySample {
  double t;
  double b_density;
  double d_density;
};

struct Trajectory {
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  double u = 0.0;           // NaN when the run used explicit initial opinions
  bool explicit_init = false;
  std::uint64_t seed = 0;
  std::vector<TrajectorySample> samples;
};

// Samples the state after all events with time <= each schedule entry.
// Schedule must be non-decreasing and start at or after state.time().
Trajectory run_recorded(VoterState& state, const std::vector<double>& schedule);

// CSV with header t,b_density,d_density; floats at 17 significant digits.
void save_trajectory(const Trajectory& tr, std::ostream& out);
void save_trajectory(const Trajectory& tr, const std::string& path);

}  // namespace voterlab
