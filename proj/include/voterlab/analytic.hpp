#pragma once

#include <cstdint>

namespace voterlab {

// (d - 2) / (d - 1): limiting fraction of time two walkers on the d-regular
// tree spend without meeting, and the plateau constant of the model.
double theta(std::uint32_t d);

// Exact Catalan number C_k; k <= 30 so the value fits a 64-bit integer.
std::uint64_t catalan(std::uint32_t k);

// P(two independent rate-1 walkers started on adjacent vertices of the
// infinite d-regular tree meet by time t), evaluated to absolute accuracy eps
// by the Poisson-Catalan series over the inter-walker distance chain.
double meeting_cdf_tree(std::uint32_t d, double t, double eps);

// Survival f_d(t) = 1 - meeting_cdf_tree(d, t, eps); decreases from 1 to
// theta(d) as t grows.
double f_survival(std::uint32_t d, double t, double eps);

// Predicted discordant-edge density 2 u (1-u) f_d(t) exp(-2 theta_d t / n).
double expected_discordance(double u, std::uint32_t d, double t, std::uint32_t n, double eps);

// Heterozygosity decay of the limiting diffusion: u (1-u) exp(-2 theta_d s)
// at diffusion time s.
double fw_variability(double u, std::uint32_t d, double s);

// Probability that the biased distance chain started at z0 ever reaches 0:
// (1/(d-1))^z0.
double gambler_hit_prob(std::uint32_t d, std::uint32_t z0);

}  // namespace voterlab
