#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "voterlab/analytic.hpp"
#include "voterlab/dual.hpp"
#include "voterlab/stats.hpp"

using namespace voterlab;

namespace {

std::vector<double> pair_meeting_samples(const RegularGraph& g, std::uint32_t x, std::uint32_t y,
                                         std::uint32_t reps, std::uint64_t seed) {
  std::vector<double> out(reps);
  for (std::uint32_t r = 0; r < reps; ++r) {
    Rng rng = Rng::for_stream(seed, r);
    const auto tau = meeting_time_pair(g, x, y, 1e7, rng);
    REQUIRE(tau.has_value());
    out[r] = *tau;
  }
  return out;
}

}  // namespace

TEST_SUITE("dual") {

TEST_CASE("coincident starts meet immediately") {
  const RegularGraph g = oracles::complete_graph(5);
  Rng rng(3);
  const auto tau = meeting_time_pair(g, 2, 2, 10.0, rng);
  REQUIRE(tau.has_value());
  CHECK(*tau == 0.0);
}

TEST_CASE("pair meeting means match the linear solve") {
  for (const RegularGraph& g : {oracles::complete_graph(4), oracles::complete_bipartite_3_3()}) {
    const Eigen::MatrixXd h = oracles::pair_meeting_times(g);
    const auto samples = pair_meeting_samples(g, 0, 1, 20000, 77 + g.vertex_count());
    const double se = standard_error(samples);
    CHECK(std::abs(mean(samples) - h(0, 1)) <= 4.0 * se);
  }
}

TEST_CASE("meeting times are exchangeable in the start pair") {
  const RegularGraph g = oracles::prism();
  const auto a = pair_meeting_samples(g, 0, 4, 4000, 11);
  const auto b = pair_meeting_samples(g, 4, 0, 4000, 12);
  const double d = ks_statistic(a, b);
  CHECK(ks_p_value(d, a.size(), b.size()) >= 1e-3);
}

TEST_CASE("small-time survival matches exact uniformization") {
  const RegularGraph g = oracles::octahedron();
  const double t = 0.7;
  const double exact = oracles::pair_meeting_survival(g, 0, 1, t);
  const std::uint32_t reps = 30000;
  std::uint32_t alive = 0;
  for (std::uint32_t r = 0; r < reps; ++r) {
    Rng rng = Rng::for_stream(202, r);
    const auto tau = meeting_time_pair(g, 0, 1, t, rng);
    alive += !tau.has_value() || *tau > t;
  }
  const double se = std::sqrt(exact * (1.0 - exact) / reps);
  CHECK(std::abs(static_cast<double>(alive) / reps - exact) <= 4.0 * se);
}

TEST_CASE("coalescing systems shrink monotonically and stay consistent") {
  const RegularGraph g = oracles::prism();
  std::vector<std::uint32_t> starts(g.vertex_count());
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v) starts[v] = v;
  WalkerSystem sys(g, starts, WalkerSystem::Mode::kCoalescing);
  REQUIRE(sys.check_occupancy());
  CHECK(sys.active_count() == g.vertex_count());
  Rng rng(5);
  double last_t = 0.0;
  std::uint32_t last_active = sys.active_count();
  while (sys.active_count() > 1) {
    const double t = sys.step(rng);
    CHECK(t > last_t);
    last_t = t;
    const std::uint32_t active = sys.active_count();
    CHECK(active <= last_active);
    CHECK(last_active - active <= 1);
    CHECK((sys.merged() == (active == last_active - 1)));
    last_active = active;
    REQUIRE(sys.check_occupancy());
  }
}

TEST_CASE("duplicate starts merge at time zero in coalescing mode") {
  const RegularGraph g = oracles::complete_graph(4);
  WalkerSystem sys(g, {2, 2, 3}, WalkerSystem::Mode::kCoalescing);
  CHECK(sys.walker_count() == 3);
  CHECK(sys.active_count() == 2);
  WalkerSystem indep(g, {2, 2, 3}, WalkerSystem::Mode::kIndependent);
  CHECK(indep.active_count() == 3);
}

TEST_CASE("coalescence mean matches the subset solve") {
  const RegularGraph g = oracles::complete_graph(4);
  const double exact = oracles::coalescence_expected_time(g);
  const std::uint32_t reps = 20000;
  std::vector<double> samples(reps);
  for (std::uint32_t r = 0; r < reps; ++r) {
    Rng rng = Rng::for_stream(303, r);
    const auto tau = coalescence_time(g, 1e7, rng);
    REQUIRE(tau.has_value());
    samples[r] = *tau;
  }
  CHECK(std::abs(mean(samples) - exact) <= 4.0 * standard_error(samples));
}

TEST_CASE("survival curves handle censoring and validate the grid") {
  const std::vector<std::optional<double>> samples = {0.5, 1.5, std::nullopt};
  const auto curve = survival_curve(samples, 2.0, {1.0, 2.0});
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].first == 1.0);
  CHECK(curve[0].second == doctest::Approx(2.0 / 3.0));
  CHECK(curve[1].second == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(survival_curve(samples, 2.0, {3.0}), std::invalid_argument);
}

TEST_CASE("an exponential sample yields its rate from the survival fit") {
  const double rate = 0.37;
  const std::uint32_t reps = 5000;
  std::vector<std::optional<double>> samples(reps);
  Rng rng(17);
  for (auto& s : samples) s = rng.exponential(rate);
  std::vector<double> grid;
  for (double t = 0.5; t <= 6.0; t += 0.5) grid.push_back(t);
  const auto curve = survival_curve(samples, 100.0, grid);
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> w;
  for (const auto& [t, sv] : curve) {
    REQUIRE(sv > 0.0);
    x.push_back(t);
    y.push_back(std::log(sv));
    w.push_back(sv * reps / (1.0 - sv));
  }
  const LineFit fit = weighted_least_squares(x, y, w);
  CHECK(std::abs(-fit.slope - rate) <= 0.05 * rate);
}

TEST_CASE("product chain returns match matrix powers") {
  const RegularGraph g = oracles::complete_graph(4);
  CHECK(product_chain_returns(g, 0, 50, 5) == 1.0);
  const std::uint32_t T = 12;
  const double exact = oracles::product_chain_expected_returns(g, T);
  const std::uint32_t reps = 40000;
  std::vector<double> counts(reps);
  for (std::uint32_t r = 0; r < reps; ++r) {
    Rng rng = Rng::for_stream(404, r);
    counts[r] = product_chain_visits(g, T, rng);
  }
  CHECK(product_chain_returns(g, T, reps, 404) == doctest::Approx(1.0 + mean(counts)));
  CHECK(std::abs(1.0 + mean(counts) - exact) <= 4.0 * standard_error(counts));
}

TEST_CASE("edge sampling is uniform over directed adjacent pairs") {
  const RegularGraph g = oracles::prism();
  const std::uint32_t reps = 36000;
  std::vector<std::uint32_t> hits(g.vertex_count() * g.vertex_count(), 0);
  Rng rng(55);
  for (std::uint32_t r = 0; r < reps; ++r) {
    const auto [x, y] = sample_edge_nu(g, rng);
    REQUIRE(x != y);
    ++hits[x * g.vertex_count() + y];
  }
  const double p = 1.0 / (2.0 * g.edge_count());
  const double se = std::sqrt(p * (1.0 - p) / reps);
  std::uint32_t seen = 0;
  for (std::uint32_t x = 0; x < g.vertex_count(); ++x)
    for (std::uint32_t y = 0; y < g.vertex_count(); ++y) {
      const double freq = static_cast<double>(hits[x * g.vertex_count() + y]) / reps;
      if (freq == 0.0) continue;
      ++seen;
      CHECK(std::abs(freq - p) <= 4.5 * se);
    }
  CHECK(seen == 2 * g.edge_count());
}

TEST_CASE("interaction marking counts shared vertices across distinct edges only") {
  const RegularGraph g = oracles::prism();
  Rng rng(6);
  // Edges sharing vertex 1 interact at the start; the pair alone does not.
  CHECK(interaction_fraction_for_edges(g, {{0, 1}, {1, 2}}, 0.0, rng) == 1.0);
  CHECK(interaction_fraction_for_edges(g, {{0, 1}}, 0.0, rng) == 0.0);
  CHECK(interaction_fraction_for_edges(g, {{0, 1}, {3, 4}}, 0.0, rng) == 0.0);
  CHECK_THROWS_AS(interaction_fraction_for_edges(g, {}, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(interaction_fraction_for_edges(g, {{0, 9}}, 1.0, rng), std::invalid_argument);
}

TEST_CASE("interaction fraction grows with the horizon and thins out with size") {
  const RegularGraph g = generate_regular(600, 3, 9);
  const double f1 = interaction_fraction(g, 12, 0.5, 400, 91);
  const double f2 = interaction_fraction(g, 12, 2.0, 400, 92);
  CHECK(f1 >= 0.0);
  CHECK(f2 <= 0.3);
  CHECK(f1 <= f2 + 0.01);
  const RegularGraph big = generate_regular(4800, 3, 9);
  const double f_big = interaction_fraction(big, 12, 2.0, 400, 93);
  CHECK(f_big < 0.5 * f2);
}

}
