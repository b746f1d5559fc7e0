#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support/oracles.hpp"
#include "voterlab/analytic.hpp"

using namespace voterlab;

TEST_SUITE("analytic") {

TEST_CASE("escape probability") {
  CHECK(theta(3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(theta(4) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(theta(5) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(theta(2), std::invalid_argument);
}

TEST_CASE("catalan numbers match the convolution recurrence") {
  std::vector<std::uint64_t> ref = {1};
  for (std::uint32_t k = 1; k <= 30; ++k) {
    std::uint64_t c = 0;
    for (std::uint32_t i = 0; i < k; ++i) c += ref[i] * ref[k - 1 - i];
    ref.push_back(c);
  }
  for (std::uint32_t k = 0; k <= 30; ++k) CHECK(catalan(k) == ref[k]);
  CHECK(catalan(10) == 16796);
  CHECK_THROWS_AS(catalan(31), std::invalid_argument);
}

TEST_CASE("meeting law basics") {
  CHECK(meeting_cdf_tree(3, 0.0, 1e-10) == 0.0);
  double prev = 0.0;
  for (double t : {0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    const double c = meeting_cdf_tree(3, t, 1e-10);
    CHECK(c >= prev);
    CHECK(c <= 1.0);
    prev = c;
  }
  CHECK_THROWS_AS(meeting_cdf_tree(2, 1.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(meeting_cdf_tree(3, -1.0, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(meeting_cdf_tree(3, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(meeting_cdf_tree(3, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("meeting law approaches the return probability of the distance walk") {
  for (std::uint32_t d : {3u, 4u, 5u, 6u})
    CHECK(std::abs(meeting_cdf_tree(d, 1e4, 1e-6) - 1.0 / (d - 1.0)) <= 1e-3);
}

TEST_CASE("survival is the complement of the cdf") {
  for (double t : {0.0, 0.5, 3.0, 40.0})
    CHECK(f_survival(3, t, 1e-10) ==
          doctest::Approx(1.0 - meeting_cdf_tree(3, t, 1e-10)).epsilon(1e-14));
}

TEST_CASE("series matches the distance-walk simulation") {
  std::uint64_t stream = 0;
  for (std::uint32_t d : {3u, 5u})
    for (double t : {1.0, 4.0}) {
      const std::uint32_t reps = 200000;
      const double mc = oracles::biased_walk_meet_prob(d, t, reps, 900 + stream++);
      const double exact = meeting_cdf_tree(d, t, 1e-12);
      const double se = std::sqrt(exact * (1.0 - exact) / reps);
      CHECK(std::abs(mc - exact) <= 4.0 * se);
    }
}

TEST_CASE("expected discordance composes its three factors") {
  const double u = 0.3;
  const double t = 2.5;
  const std::uint32_t n = 500;
  const double direct = expected_discordance(u, 3, t, n, 1e-10);
  const double composed =
      2.0 * u * (1.0 - u) * f_survival(3, t, 1e-10) * std::exp(-2.0 * theta(3) * t / n);
  CHECK(direct == doctest::Approx(composed).epsilon(1e-13));
  CHECK(expected_discordance(0.0, 3, t, n, 1e-10) == 0.0);
  CHECK(expected_discordance(1.0, 3, t, n, 1e-10) == 0.0);
  CHECK(expected_discordance(0.5, 3, 0.0, n, 1e-10) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK_THROWS_AS(expected_discordance(1.5, 3, t, n, 1e-10), std::invalid_argument);
}

TEST_CASE("variability decay on the consensus scale") {
  CHECK(fw_variability(0.5, 3, 0.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(fw_variability(0.5, 3, 1.0) == doctest::Approx(0.25 * std::exp(-1.0)).epsilon(1e-13));
  CHECK(fw_variability(0.2, 4, 0.75) ==
        doctest::Approx(0.16 * std::exp(-2.0 * (2.0 / 3.0) * 0.75)).epsilon(1e-13));
}

TEST_CASE("gambler hit probability against a biased-walk simulation") {
  CHECK(gambler_hit_prob(3, 0) == 1.0);
  CHECK(gambler_hit_prob(3, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(gambler_hit_prob(4, 2) == doctest::Approx(1.0 / 9.0).epsilon(1e-13));

  // Discrete jump chain of the distance walk: down 1/d, up (d-1)/d, from z0=2.
  const std::uint32_t d = 3;
  const std::uint32_t reps = 200000;
  std::uint32_t hits = 0;
  for (std::uint32_t r = 0; r < reps; ++r) {
    Rng rng = Rng::for_stream(41, r);
    std::uint32_t z = 2;
    while (z > 0 && z <= 64) z += rng.uniform() < 1.0 / d ? -1 : 1;
    hits += z == 0;
  }
  const double p = gambler_hit_prob(d, 2);
  const double se = std::sqrt(p * (1.0 - p) / reps);
  CHECK(std::abs(static_cast<double>(hits) / reps - p) <= 4.0 * se);
}

}
