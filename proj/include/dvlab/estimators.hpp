#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dvlab/gauges.hpp"
#include "dvlab/rng.hpp"
#include "dvlab/stats.hpp"

namespace dvlab {

/// Samples handled by one RNG replica. Fixed so that estimates do not
/// depend on the worker count.
inline constexpr std::size_t kReplicaChunk = 4096;

/// Monte Carlo estimate of M(K), the mean of the gauge over the uniform
/// measure on S^{n-1}.
EstimateCI estimate_M(const BodySpec &body, std::size_t n_samples, double confidence, const RngStream &rng);

struct ProjMoments {
  EstimateCI mean_abs; ///< E|P_k x|
  EstimateCI mean_sq;  ///< E|P_k x|^2
};

/// Moments of |P_k x| for x uniform on S^{n-1} and P_k the projection onto
/// span(e_1, ..., e_k).
ProjMoments proj_moments(std::size_t n, std::size_t k, std::size_t n_samples, const RngStream &rng,
                         double confidence = 0.99);

struct TailPoint {
  double t = 0.0;
  double tail = 0.0;       ///< empirical P(| |P_k x| - mean | >= t)
  std::uint64_t count = 0; ///< number of exceedances
  bool zero = false;       ///< no exceedance observed
};

struct TailTable {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t n_samples = 0;
  double sample_mean = 0.0;
  std::vector<TailPoint> points;
};

/// Empirical deviation tails of the 1-Lipschitz map x -> |P_k x| about its
/// sample mean. t_grid must be non-decreasing.
TailTable tail_table(std::size_t n, std::size_t k, std::span<const double> t_grid, std::size_t n_samples,
                     const RngStream &rng);

struct TailFitPoint {
  double t = 0.0;
  double t2n = 0.0;
  double tail = 0.0;
};

struct TailFit {
  double c0_hat = 0.0;
  double r_squared = 0.0;
  std::vector<TailFitPoint> points; ///< the points used in the regression
};

/// Least-squares fit of -ln(tail / 4) = c0 * t^2 n through the origin over
/// points with nonzero tail. r_squared is the uncentered coefficient of
/// determination, the standard one for a regression without intercept.
/// Throws InsufficientData when fewer than 3 points are usable.
TailFit fit_concentration(const TailTable &table);

struct EquidistSamples {
  std::vector<double> fixed_subspace;  ///< |P_{V0} x|, x uniform, V0 = span(e_1..e_k)
  std::vector<double> random_subspace; ///< |P_V e_1|, V Haar on G(n, k_haar)
};

/// Draws both sides of the equi-distribution identity. k_haar defaults to
/// k; a different value gives a deliberately mismatched B side.
EquidistSamples equidist_samples(std::size_t n, std::size_t k, std::size_t n_samples, const RngStream &rng,
                                 std::size_t k_haar = 0);

} // namespace dvlab
