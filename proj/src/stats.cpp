#include "dvlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "dvlab/errors.hpp"

namespace dvlab {

double normal_critical(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw UsageError("confidence must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, 0.5 + 0.5 * confidence);
}

EstimateCI normal_ci(double mean, double stddev, std::uint64_t n, double confidence) {
  const double hw = normal_critical(confidence) * stddev / std::sqrt(static_cast<double>(n));
  return {mean, hw, n, confidence, mean - hw, mean + hw, stddev};
}

EstimateCI wilson_ci(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) {
    throw UsageError("wilson_ci: trials must be positive");
  }
  if (successes > trials) {
    throw UsageError("wilson_ci: successes exceed trials");
  }
  const double z = normal_critical(confidence);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2n = z * z / n;
  const double denom = 1.0 + z2n;
  const double center = (p + 0.5 * z2n) / denom;
  const double spread = z * std::sqrt(p * (1.0 - p) / n + 0.25 * z2n / n) / denom;
  double lo = std::max(0.0, center - spread);
  double hi = std::min(1.0, center + spread);
  if (successes == 0) {
    lo = 0.0;
  }
  if (successes == trials) {
    hi = 1.0;
  }
  return {p, 0.5 * (hi - lo), trials, confidence, lo, hi, std::sqrt(p * (1.0 - p))};
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0) {
    return 1.0;
  }
  if (lambda < 1.18) {
    // Jacobi-theta form, fast for small lambda.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double w = std::sqrt(2.0 * std::numbers::pi) / lambda;
    double s = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double m = 2.0 * j - 1.0;
      const double term = std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
      s += term;
      if (term < 1e-300) {
        break;
      }
    }
    return std::clamp(1.0 - w * s, 0.0, 1.0);
  }
  double s = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    s += sign * term;
    sign = -sign;
    if (term < 1e-300) {
      break;
    }
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KSResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    throw UsageError("ks_two_sample: empty sample");
  }
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size());
  const double nb = static_cast<double>(y.size());

  // Walk both sorted samples, advancing past all ties before comparing CDFs.
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) {
      ++i;
    }
    while (j < y.size() && y[j] == v) {
      ++j;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));

  const double ne = na * nb / (na + nb);
  return {d, kolmogorov_sf(std::sqrt(ne) * d), x.size(), y.size()};
}

} // namespace dvlab
