#include "voterlab/voter.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace voterlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

VoterState::VoterState(const RegularGraph& g, double u, std::uint64_t seed)
    : g_(&g), seed_(seed), init_u_(u), rng_(seed), opinions_(g.vertex_count()) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u must lie in [0, 1]");
  for (auto& o : opinions_) o = rng_.bernoulli(u) ? 1 : 0;
  init_counters();
}

VoterState::VoterState(const RegularGraph& g, const std::vector<std::uint8_t>& opinions,
                       std::uint64_t seed)
    : g_(&g),
      seed_(seed),
      init_u_(std::numeric_limits<double>::quiet_NaN()),
      rng_(seed),
      opinions_(opinions) {
  if (opinions_.size() != g.vertex_count())
    throw std::invalid_argument("opinion vector size must equal the vertex count");
  for (auto o : opinions_)
    if (o > 1) throw std::invalid_argument("opinions must be 0 or 1");
  init_counters();
}

void VoterState::init_counters() {
  ones_ = 0;
  for (auto o : opinions_) ones_ += o;
  discordant_ = 0;
  for (const auto& e : g_->edges())
    discordant_ += opinions_[e.first] != opinions_[e.second];
  next_event_ = discordant_ == 0 ? kInf : rng_.exponential(g_->vertex_count());
}

void VoterState::apply_event() {
  t_ = next_event_;
  const std::uint32_t x = rng_.uniform_below(g_->vertex_count());
  const std::uint32_t y = g_->neighbor(x, rng_.uniform_below(g_->degree()));
  const std::uint8_t nv = opinions_[y];
  const std::uint8_t ov = opinions_[x];
  if (nv != ov) {
    int delta = 0;
    const std::uint32_t* nb = g_->neighbors(x);
    for (std::uint32_t i = 0; i < g_->degree(); ++i) {
      const std::uint8_t w = opinions_[nb[i]];
      delta += (w == ov) - (w == nv);
    }
    discordant_ = static_cast<std::uint32_t>(static_cast<int>(discordant_) + delta);
    opinions_[x] = nv;
    ones_ = static_cast<std::uint32_t>(static_cast<int>(ones_) + (nv ? 1 : -1));
  }
  next_event_ = discordant_ == 0 ? kInf : next_event_ + rng_.exponential(g_->vertex_count());
}

void VoterState::advance_to(double t) {
  if (t < t_) throw std::invalid_argument("target time precedes current time");
  while (next_event_ <= t) apply_event();
  t_ = t;
}

std::optional<double> VoterState::run_until_consensus(double t_cap) {
  if (t_cap < t_) throw std::invalid_argument("t_cap precedes current time");
  if (discordant_ == 0) return t_;
  while (next_event_ <= t_cap) {
    apply_event();
    if (discordant_ == 0) return t_;
  }
  t_ = t_cap;
  return std::nullopt;
}

Trajectory run_recorded(VoterState& state, const std::vector<double>& schedule) {
  Trajectory tr;
  const RegularGraph& g = state.graph();
  tr.n = g.vertex_count();
  tr.d = g.degree();
  tr.u = state.init_u();
  tr.explicit_init = std::isnan(state.init_u());
  tr.seed = state.seed();
  tr.samples.reserve(schedule.size());
  double prev = state.time();
  for (double t : schedule) {
    if (t < prev)
      throw std::invalid_argument("schedule must be non-decreasing from the current time");
    prev = t;
    state.advance_to(t);
    tr.samples.push_back({t, state.b_density(), state.d_density()});
  }
  return tr;
}

void save_trajectory(const Trajectory& tr, std::ostream& out) {
  out << "t,b_density,d_density\n";
  char buf[96];
  for (const auto& s : tr.samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.b_density, s.d_density);
    out << buf;
  }
  if (!out) throw std::runtime_error("failed writing trajectory");
}

void save_trajectory(const Trajectory& tr, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_trajectory(tr, out);
}

}  // namespace voterlab
