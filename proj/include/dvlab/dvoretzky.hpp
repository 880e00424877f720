#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dvlab/extrema.hpp"
#include "dvlab/gauges.hpp"
#include "dvlab/rng.hpp"
#include "dvlab/stats.hpp"

namespace dvlab {

/// Fixed probability level c in (0, 1).
struct ConstantThreshold {
  double c = 0.5;
};
/// n / (n + k).
struct MilmanSchechtmanThreshold {};
/// 1 - exp(-c_tilde k).
struct DvoretzkyProbThreshold {
  double c_tilde = 1.0;
};

using ThresholdRule = std::variant<ConstantThreshold, MilmanSchechtmanThreshold, DvoretzkyProbThreshold>;

double threshold_value(const ThresholdRule &rule, std::size_t n, std::size_t k);
/// `const:<c>`, `ms`, `dvoretzky:<c_tilde>`.
ThresholdRule parse_threshold(std::string_view text);
std::string threshold_to_text(const ThresholdRule &rule);

/// Confidence of the Wilson intervals used for section probabilities.
inline constexpr double kSectionConfidence = 0.99;

enum class ProbeDecision { pass, fail, uncertain };
const char *to_string(ProbeDecision d);

struct ProbeResult {
  std::size_t k = 0;
  EstimateCI p_hat;                  ///< Wilson interval
  ProbeDecision decision = ProbeDecision::uncertain;
  std::size_t n_sections = 0;
  double threshold = 0.0;
  bool by_point_estimate = false;    ///< still uncertain after all extra rounds

  /// Outcome used by the search: the interval decision, or the point
  /// estimate when the interval never separated from the threshold.
  bool passed() const;
};

struct SearchBudget {
  std::size_t sections_per_k = 400;
  int max_extra_rounds = 3;
  std::size_t M_samples = 100000;
  /// Re-probe the boundary at M -/+ half_width.
  bool m_sensitivity = true;
};

struct DvoretzkyResult {
  std::size_t k_hat = 0;
  std::vector<ProbeResult> probes; ///< in probing order
  double epsilon = 0.0;
  ThresholdRule threshold;
  EstimateCI M_used;
  double b_used = 0.0;
  double theory = 0.0;             ///< n (M/b)^2
  double ratio = 0.0;              ///< k_hat / theory
  bool non_monotone_flag = false;
  bool degraded_confidence = false;
  /// k_hat range when M is moved across its confidence interval.
  std::size_t k_hat_lo = 0;
  std::size_t k_hat_hi = 0;
};

/// True iff (1-eps) M < ||x||_K < (1+eps) M for every unit x in the
/// section. Closed-form extrema are used when available; a failing closed
/// form short-circuits the sampled side.
bool is_spherical(const BodySpec &body, const SubspaceBasis &basis, double epsilon, double M,
                  const ExtremaConfig &cfg, RngStream &rng);

/// Fraction of n_sections Haar-random k-sections that are spherical, with
/// its Wilson interval at kSectionConfidence. Section j uses rng.replica(j).
EstimateCI section_probability(const BodySpec &body, std::size_t k, double epsilon, double M,
                               std::size_t n_sections, const ExtremaConfig &cfg, const RngStream &rng);

/// Largest k whose section probability exceeds the threshold, found by
/// doubling then bisection with adaptive sample sizes.
DvoretzkyResult dvoretzky_dimension(const BodySpec &body, double epsilon, const ThresholdRule &rule,
                                    const SearchBudget &budget, const ExtremaConfig &cfg, const RngStream &rng);

struct Lemma1Check {
  bool premise_holds = false;    ///< P(|P_k x| < t) > 1/2, by Wilson lower bound
  bool conclusion_holds = false; ///< k < c2 t^2 n
  bool violated = false;
  EstimateCI below_t;            ///< Wilson interval of P(|P_k x| < t)
};

Lemma1Check lemma1_check(std::size_t n, std::size_t k, double t, std::size_t n_samples, double c2,
                         const RngStream &rng);

/// n (M/b)^2.
double theory_ratio(const BodySpec &body, const EstimateCI &M, double b, std::size_t n);

} // namespace dvlab
