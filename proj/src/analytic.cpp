#include "voterlab/analytic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace voterlab {

namespace {

void check_degree(std::uint32_t d) {
  if (d < 3) throw std::invalid_argument("degree must be at least 3");
}

void check_eps(double eps) {
  if (!(eps > 0.0) || eps >= 1.0)
    throw std::invalid_argument("eps must lie in (0, 1)");
}

}  // namespace

double theta(std::uint32_t d) {
  check_degree(d);
  return (d - 2.0) / (d - 1.0);
}

std::uint64_t catalan(std::uint32_t k) {
  if (k > 30) throw std::invalid_argument("catalan(k) supports k <= 30 only");
  static const auto table = [] {
    std::array<std::uint64_t, 31> c{};
    c[0] = 1;
    for (std::uint32_t i = 0; i < 30; ++i)
      c[i + 1] = c[i] * 2 * (2 * i + 1) / (i + 2);
    return c;
  }();
  return table[k];
}

double meeting_cdf_tree(std::uint32_t d, double t, double eps) {
  check_degree(d);
  check_eps(eps);
  if (t < 0.0) throw std::invalid_argument("t must be non-negative");
  if (t == 0.0) return 0.0;

  // Poisson mixture over the jump count kappa of the rate-2 distance chain;
  // the inner Catalan sum gains its next term a_s at each odd kappa = 2s + 1.
  // Weights stay in log space; the loop stops once the accounted Poisson mass
  // reaches 1 - eps/2, since every inner sum is below 1/(d-1) <= 1/2.
  const double log2t = std::log(2.0 * t);
  const double dd = static_cast<double>(d);
  double inner = 0.0;
  double a = 1.0 / dd;  // a_s = C_s (1/d)^{s+1} ((d-1)/d)^s, starting at s = 0
  std::uint64_t s_next = 0;
  double acc = 0.0;
  double mass = 0.0;
  const double target = 1.0 - 0.5 * eps;
  // Hard stop twelve standard deviations past the Poisson mode.
  const auto kappa_cap =
      static_cast<std::uint64_t>(2.0 * t + 12.0 * std::sqrt(2.0 * t) + 64.0);

  for (std::uint64_t kappa = 0; kappa <= kappa_cap && mass < target; ++kappa) {
    if (kappa == 2 * s_next + 1) {
      inner += a;
      a *= 2.0 * (2.0 * s_next + 1.0) / (s_next + 2.0) * (dd - 1.0) / (dd * dd);
      ++s_next;
    }
    const double logw =
        static_cast<double>(kappa) * log2t - 2.0 * t - std::lgamma(static_cast<double>(kappa) + 1.0);
    if (logw > -745.0) {
      const double w = std::exp(logw);
      acc += w * inner;
      mass += w;
    }
  }
  return acc;
}

double f_survival(std::uint32_t d, double t, double eps) {
  return 1.0 - meeting_cdf_tree(d, t, eps);
}

double expected_discordance(double u, std::uint32_t d, double t, std::uint32_t n, double eps) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u must lie in [0, 1]");
  if (n < 1) throw std::invalid_argument("n must be positive");
  const double th = theta(d);
  return 2.0 * u * (1.0 - u) * f_survival(d, t, eps) * std::exp(-2.0 * th * t / n);
}

double fw_variability(double u, std::uint32_t d, double s) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u must lie in [0, 1]");
  if (s < 0.0) throw std::invalid_argument("s must be non-negative");
  return u * (1.0 - u) * std::exp(-2.0 * theta(d) * s);
}

double gambler_hit_prob(std::uint32_t d, std::uint32_t z0) {
  check_degree(d);
  return std::pow(1.0 / (d - 1.0), static_cast<double>(z0));
}

}  // namespace voterlab
