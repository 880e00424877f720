#pragma once

#include <cstdint>
#include <span>

namespace dvlab {

/// Two-sided standard normal critical value: z with P(|Z| <= z) = confidence.
double normal_critical(double confidence);

/// Monte Carlo estimate with a confidence interval. For normal-approximation
/// intervals lo/hi are mean -/+ half_width; for Wilson intervals they are
/// the (asymmetric) score bounds and half_width is (hi - lo) / 2.
struct EstimateCI {
  double mean = 0.0;
  double half_width = 0.0;
  std::uint64_t n_samples = 0;
  double confidence = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double stddev = 0.0; ///< per-sample standard deviation
};

/// Normal-approximation interval from a sample mean and standard deviation.
EstimateCI normal_ci(double mean, double stddev, std::uint64_t n, double confidence);

/// Wilson score interval for a binomial proportion, clipped to [0, 1].
EstimateCI wilson_ci(std::uint64_t successes, std::uint64_t trials, double confidence);

struct KSResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// Q(sqrt(n_a n_b / (n_a + n_b)) D).
KSResult ks_two_sample(std::span<const double> a, std::span<const double> b);

} // namespace dvlab
