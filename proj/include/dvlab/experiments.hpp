#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "dvlab/dvoretzky.hpp"
#include "dvlab/result_table.hpp"

namespace dvlab {

// Parameter records for each experiment. They serialize into the run
// manifest, and a manifest's params reproduce the run exactly.

struct MomentsParams {
  std::size_t n = 100;
  std::size_t k = 25;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

struct TailsParams {
  std::size_t n = 100;
  std::size_t k = 25;
  std::size_t samples = 1000000;
  /// Empty selects the default grid s / sqrt(n), s = 0.5, 0.75, ..., 2.5.
  std::vector<double> t_grid;
  std::uint64_t seed = 0;
  /// When positive, replaces the sampled tails by 4 exp(-c0 t^2 n) to
  /// self-test the regression.
  double synthetic_c0 = 0.0;
};

struct EquidistParams {
  std::size_t n = 50;
  std::size_t k = 10;
  std::size_t samples = 10000;
  std::size_t n_seeds = 100;
  double alpha = 0.01;
  /// Draw the Haar side with k + 1 (power check).
  bool mismatch = false;
  std::uint64_t seed = 0;
};

/// Search budget and extrema settings shared by kdim, scaling and remark2.
struct SearchParams {
  double eps = 0.5;
  std::string threshold = "const:0.5";
  std::size_t sections = 400;
  int max_rounds = 3;
  std::size_t m_samples = 100000;
  bool m_sensitivity = true;
  std::size_t net = 0;
  bool refine = true;
  std::uint64_t seed = 0;

  SearchBudget budget() const;
  ExtremaConfig extrema() const;
};

struct KdimParams {
  std::string body = "euclidean:n=20";
  SearchParams search;
};

struct ScalingParams {
  std::vector<std::string> bodies;
  SearchParams search;
};

struct Remark2Params {
  std::size_t n = 256;
  std::vector<std::size_t> l_list{4, 16};
  std::vector<double> eps_list{0.2, 0.5};
  SearchParams search;
};

struct Lemma1Params {
  std::vector<std::size_t> n_list{100};
  /// Empty selects a default grid of k values up to n / 2.
  std::vector<std::size_t> k_grid;
  std::vector<double> t_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double c2 = 8.0;
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MomentsParams, n, k, samples, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TailsParams, n, k, samples, t_grid, seed, synthetic_c0)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EquidistParams, n, k, samples, n_seeds, alpha, mismatch, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SearchParams, eps, threshold, sections, max_rounds, m_samples,
                                                m_sensitivity, net, refine, seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KdimParams, body, search)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ScalingParams, bodies, search)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Remark2Params, n, l_list, eps_list, search)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Lemma1Params, n_list, k_grid, t_grid, c2, samples, seed)

std::vector<double> default_tail_grid(std::size_t n);
std::vector<std::size_t> default_lemma1_k_grid(std::size_t n);

ResultTable cmd_moments(const MomentsParams &p);
ResultTable cmd_tails(const TailsParams &p);
ResultTable cmd_equidist(const EquidistParams &p);
ResultTable cmd_kdim(const KdimParams &p);
ResultTable cmd_scaling(const ScalingParams &p);
ResultTable cmd_remark2(const Remark2Params &p);
ResultTable cmd_lemma1(const Lemma1Params &p);

/// Re-runs the experiment recorded in a manifest.
ResultTable replay(const RunManifest &manifest);

} // namespace dvlab
