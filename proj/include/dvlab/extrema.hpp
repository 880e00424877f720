#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dvlab/gauges.hpp"
#include "dvlab/randgeom.hpp"

namespace dvlab {

/// Largest section dimension for which sampled extrema are computed. The
/// random net cannot be made dense enough beyond this.
inline constexpr std::size_t kSampledExtremaMaxK = 25;

enum class ExtremaMethod { exact, sampled, sampled_refined };

const char *to_string(ExtremaMethod m);

struct ExtremaResult {
  double min_val = 0.0;
  double max_val = 0.0;
  ExtremaMethod method = ExtremaMethod::exact;
  std::uint64_t n_evals = 0;
  bool certified = false; ///< both sides come from closed forms
};

struct ExtremaConfig {
  std::size_t n_net = 0; ///< 0 selects 2000 * k
  bool refine = true;
  double refine_tol = 1e-8;
  int refine_max_iter = 200;
  int restarts = 8;
  /// Replace a side by its closed form when one exists.
  bool use_exact = true;

  std::size_t net_size(std::size_t k) const { return n_net ? n_net : 2000 * k; }
};

/// Exact sup of the gauge over V ∩ S^{n-1}, when a closed form exists.
/// Polytopes (including l_inf): max_i |V^T a_i|. Polar hull:
/// max(1, R |P_V e_1|). Euclidean: 1. One-dimensional sections: the gauge
/// of the basis vector.
std::optional<double> exact_sup(const BodySpec &body, const SubspaceBasis &basis);

/// Exact inf over V ∩ S^{n-1}, when a closed form exists (Euclidean, polar
/// hull, one-dimensional sections).
std::optional<double> exact_inf(const BodySpec &body, const SubspaceBasis &basis);

/// Bracket [min, max] of the section gauge from a random net on S^{k-1}
/// (the max side also tries the normalized projection of max_direction),
/// optionally refined by local search; closed forms override their side
/// when cfg.use_exact is set. Throws UsageError when sampling would be
/// needed for k > kSampledExtremaMaxK.
ExtremaResult sample_extrema(const BodySpec &body, const SubspaceBasis &basis, const ExtremaConfig &cfg,
                             RngStream &rng);

enum class SearchMode { min, max };

struct LocalOptimum {
  std::vector<double> point; ///< unit k-vector
  double value = 0.0;
  int iterations = 0;        ///< accepted improvement steps
  std::uint64_t n_evals = 0;
};

/// Finite-difference ascent/descent on S^{k-1} with backtracking. The
/// returned value is never worse than the value at `start`.
LocalOptimum refine_local(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> start,
                          SearchMode mode, double tol, int max_iter);

} // namespace dvlab
