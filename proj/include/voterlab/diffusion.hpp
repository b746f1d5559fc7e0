#pragma once

#include <cstdint>
#include <vector>

#include "voterlab/rng.hpp"

namespace voterlab {

struct DiffusionPath {
  double dt = 0.0;
  bool absorbed = false;
  // values[k] is the state after k steps; the last entry sits at the horizon.
  std::vector<double> values;
};

// Euler-Maruyama path of dB = sqrt(2 theta_d B (1 - B)) dW started at u,
// clamped to [0, 1] and absorbed on hitting either boundary. The grid is
// uniform with step dt; a shorter final step lands exactly on the horizon.
DiffusionPath simulate_fw(double u, std::uint32_t d, double horizon, double dt, Rng& rng);

// Endpoint values at the horizon across replicas, one derived stream each.
std::vector<double> endpoint_samples(double u, std::uint32_t d, double horizon, double dt,
                                     std::uint32_t replicas, std::uint64_t seed);

}  // namespace voterlab
