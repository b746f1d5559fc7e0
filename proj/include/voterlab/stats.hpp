#pragma once

#include <cstddef>
#include <vector>

namespace voterlab {

double mean(const std::vector<double>& xs);

// Unbiased sample variance; zero for fewer than two samples.
double sample_variance(const std::vector<double>& xs);

// Standard error of the mean: sqrt(sample_variance / count).
double standard_error(const std::vector<double>& xs);

// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| with exact tie
// handling. Both samples must be nonempty.
double ks_statistic(std::vector<double> a, std::vector<double> b);

// Asymptotic two-sided p-value for the two-sample statistic.
double ks_p_value(double statistic, std::size_t na, std::size_t nb);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Weighted least squares of y against x. Weights must be non-negative with a
// positive total; at least two distinct x values are required.
LineFit weighted_least_squares(const std::vector<double>& x, const std::vector<double>& y,
                               const std::vector<double>& w);

}  // namespace voterlab
