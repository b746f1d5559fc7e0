#include "voterlab/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "voterlab/analytic.hpp"

namespace voterlab {

namespace {

void check_arguments(double u, double horizon, double dt) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("u must lie in [0, 1]");
  if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be non-negative");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

// One Euler step from b (interior), returning the clamped new state.
inline double euler_step(double b, double two_theta, double step, double z) {
  const double var = two_theta * b * (1.0 - b);
  b += std::sqrt(var * step) * z;
  if (b <= 0.0) return 0.0;
  if (b >= 1.0) return 1.0;
  return b;
}

}  // namespace

DiffusionPath simulate_fw(double u, std::uint32_t d, double horizon, double dt, Rng& rng) {
  check_arguments(u, horizon, dt);
  const double two_theta = 2.0 * theta(d);
  DiffusionPath path;
  path.dt = dt;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  path.values.reserve(steps + 1);
  path.values.push_back(u);
  double b = u;
  path.absorbed = b == 0.0 || b == 1.0;
  for (std::size_t k = 0; k < steps; ++k) {
    if (!path.absorbed) {
      const double step = std::min(dt, horizon - static_cast<double>(k) * dt);
      b = euler_step(b, two_theta, step, rng.normal());
      path.absorbed = b == 0.0 || b == 1.0;
    }
    path.values.push_back(b);
  }
  return path;
}

std::vector<double> endpoint_samples(double u, std::uint32_t d, double horizon, double dt,
                                     std::uint32_t replicas, std::uint64_t seed) {
  check_arguments(u, horizon, dt);
  if (replicas == 0) throw std::invalid_argument("replicas must be positive");
  const double two_theta = 2.0 * theta(d);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> out(replicas);
  for (std::uint32_t r = 0; r < replicas; ++r) {
    Rng rng = Rng::for_stream(seed, r);
    double b = u;
    for (std::size_t k = 0; k < steps && b != 0.0 && b != 1.0; ++k) {
      const double step = std::min(dt, horizon - static_cast<double>(k) * dt);
      b = euler_step(b, two_theta, step, rng.normal());
    }
    out[r] = b;
  }
  return out;
}

}  // namespace voterlab
