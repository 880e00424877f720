#include "dvlab/dvoretzky.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "dvlab/errors.hpp"
#include "dvlab/estimators.hpp"
#include "dvlab/parallel.hpp"
#include "dvlab/randgeom.hpp"

namespace dvlab {

namespace {

constexpr std::uint64_t kTagEstimateM = 0x4D4D4D;
constexpr std::uint64_t kTagProbeBase = 0x5EC7100000000ull;

template <class... Ts> struct overloaded : Ts... {
  using Ts::operator()...;
};

double parse_number(std::string_view s, const char *what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError(std::string("threshold: bad ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw UsageError("epsilon must lie in (0, 1)");
  }
}

// Per-section pass/fail outcomes for one k, grown on demand so that extra
// rounds reuse the sections already drawn.
class SectionProbe {
public:
  SectionProbe(const BodySpec &body, std::size_t k, double epsilon, double M, const ExtremaConfig &cfg,
               RngStream rng)
      : body_(body), k_(k), epsilon_(epsilon), M_(M), cfg_(cfg), rng_(rng) {}

  std::uint64_t successes(std::size_t n_sections) {
    const std::size_t have = outcomes_.size();
    if (n_sections > have) {
      outcomes_.resize(n_sections);
      const std::size_t n = dimension(body_);
      parallel_for(n_sections - have, [&](std::size_t i) {
        const std::size_t j = have + i;
        auto stream = rng_.replica(j);
        const auto basis = haar_basis(n, k_, stream);
        outcomes_[j] = is_spherical(body_, basis, epsilon_, M_, cfg_, stream) ? 1 : 0;
      });
    }
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < n_sections; ++j) {
      s += outcomes_[j];
    }
    return s;
  }

private:
  const BodySpec &body_;
  std::size_t k_;
  double epsilon_;
  double M_;
  const ExtremaConfig &cfg_;
  RngStream rng_;
  std::vector<unsigned char> outcomes_;
};

ProbeDecision decide(const EstimateCI &ci, double threshold) {
  if (ci.lo > threshold) {
    return ProbeDecision::pass;
  }
  if (ci.hi < threshold) {
    return ProbeDecision::fail;
  }
  return ProbeDecision::uncertain;
}

RngStream probe_stream(const RngStream &root, std::size_t k) { return root.fork(kTagProbeBase + k); }

ProbeResult run_probe(const BodySpec &body, std::size_t k, double epsilon, double M, const ThresholdRule &rule,
                      std::size_t base_sections, int max_extra_rounds, const ExtremaConfig &cfg,
                      const RngStream &root) {
  const std::size_t n = dimension(body);
  SectionProbe probe(body, k, epsilon, M, cfg, probe_stream(root, k));
  ProbeResult res;
  res.k = k;
  res.threshold = threshold_value(rule, n, k);
  std::size_t sections = base_sections;
  for (int round = 0;; ++round) {
    res.p_hat = wilson_ci(probe.successes(sections), sections, kSectionConfidence);
    res.n_sections = sections;
    res.decision = decide(res.p_hat, res.threshold);
    if (res.decision != ProbeDecision::uncertain || round >= max_extra_rounds) {
      break;
    }
    sections *= 2;
  }
  res.by_point_estimate = res.decision == ProbeDecision::uncertain;
  return res;
}

} // namespace

double threshold_value(const ThresholdRule &rule, std::size_t n, std::size_t k) {
  if (k == 0) {
    throw UsageError("threshold_value: k must be positive");
  }
  return std::visit(overloaded{
                        [](const ConstantThreshold &c) { return c.c; },
                        [&](const MilmanSchechtmanThreshold &) {
                          return static_cast<double>(n) / static_cast<double>(n + k);
                        },
                        [&](const DvoretzkyProbThreshold &d) {
                          return -std::expm1(-d.c_tilde * static_cast<double>(k));
                        },
                    },
                    rule);
}

ThresholdRule parse_threshold(std::string_view text) {
  if (text == "ms") {
    return MilmanSchechtmanThreshold{};
  }
  if (text.starts_with("const:")) {
    const double c = parse_number(text.substr(6), "constant");
    if (!(c > 0.0 && c < 1.0)) {
      throw UsageError("threshold: constant must lie in (0, 1)");
    }
    return ConstantThreshold{c};
  }
  if (text.starts_with("dvoretzky:")) {
    const double c = parse_number(text.substr(10), "c_tilde");
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw UsageError("threshold: c_tilde must be positive");
    }
    return DvoretzkyProbThreshold{c};
  }
  throw UsageError("threshold: expected const:<c>, ms or dvoretzky:<c_tilde>, got '" + std::string(text) + "'");
}

std::string threshold_to_text(const ThresholdRule &rule) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ConstantThreshold &c) { os << "const:" << c.c; },
                 [&](const MilmanSchechtmanThreshold &) { os << "ms"; },
                 [&](const DvoretzkyProbThreshold &d) { os << "dvoretzky:" << d.c_tilde; },
             },
             rule);
  return os.str();
}

const char *to_string(ProbeDecision d) {
  switch (d) {
  case ProbeDecision::pass:
    return "pass";
  case ProbeDecision::fail:
    return "fail";
  case ProbeDecision::uncertain:
    return "uncertain";
  }
  return "?";
}

bool ProbeResult::passed() const {
  if (decision == ProbeDecision::uncertain) {
    return p_hat.mean > threshold;
  }
  return decision == ProbeDecision::pass;
}

bool is_spherical(const BodySpec &body, const SubspaceBasis &basis, double epsilon, double M,
                  const ExtremaConfig &cfg, RngStream &rng) {
  require_norm(body, "is_spherical");
  check_epsilon(epsilon);
  if (!(M > 0.0)) {
    throw UsageError("is_spherical: M must be positive");
  }
  const double lower = (1.0 - epsilon) * M;
  const double upper = (1.0 + epsilon) * M;
  std::optional<double> sup, inf;
  if (cfg.use_exact) {
    sup = exact_sup(body, basis);
    if (sup && !(*sup < upper)) {
      return false;
    }
    inf = exact_inf(body, basis);
    if (inf && !(*inf > lower)) {
      return false;
    }
    if (sup && inf) {
      return true;
    }
  }
  const ExtremaResult ext = sample_extrema(body, basis, cfg, rng);
  return ext.min_val > lower && ext.max_val < upper;
}

EstimateCI section_probability(const BodySpec &body, std::size_t k, double epsilon, double M,
                               std::size_t n_sections, const ExtremaConfig &cfg, const RngStream &rng) {
  const std::size_t n = dimension(body);
  if (k == 0 || k > n) {
    throw UsageError("section_probability: need 1 <= k <= n");
  }
  if (n_sections < 30) {
    throw UsageError("section_probability: need at least 30 sections");
  }
  require_norm(body, "section_probability");
  check_epsilon(epsilon);
  SectionProbe probe(body, k, epsilon, M, cfg, rng);
  return wilson_ci(probe.successes(n_sections), n_sections, kSectionConfidence);
}

DvoretzkyResult dvoretzky_dimension(const BodySpec &body, double epsilon, const ThresholdRule &rule,
                                    const SearchBudget &budget, const ExtremaConfig &cfg,
                                    const RngStream &rng) {
  require_norm(body, "dvoretzky_dimension");
  check_epsilon(epsilon);
  if (budget.sections_per_k < 30 || budget.max_extra_rounds < 0 || budget.M_samples < 2) {
    throw UsageError("dvoretzky_dimension: budget needs sections_per_k >= 30, max_extra_rounds >= 0, "
                     "M_samples >= 2");
  }
  const std::size_t n = dimension(body);

  DvoretzkyResult res;
  res.epsilon = epsilon;
  res.threshold = rule;
  res.M_used = estimate_M(body, budget.M_samples, 0.99, rng.fork(kTagEstimateM));
  res.b_used = b_exact(body);
  const double M = res.M_used.mean;

  std::map<std::size_t, bool> outcome;
  auto passes = [&](std::size_t k) {
    auto probe = run_probe(body, k, epsilon, M, rule, budget.sections_per_k, budget.max_extra_rounds, cfg, rng);
    outcome[k] = probe.passed();
    res.probes.push_back(probe);
    return outcome[k];
  };

  std::size_t k_hat = 0;
  if (passes(1)) {
    std::size_t last_pass = 1;
    std::size_t first_fail = 0;
    while (last_pass < n) {
      const std::size_t next = std::min(2 * last_pass, n);
      if (passes(next)) {
        last_pass = next;
      } else {
        first_fail = next;
        break;
      }
    }
    if (first_fail != 0) {
      while (first_fail - last_pass > 1) {
        const std::size_t mid = last_pass + (first_fail - last_pass) / 2;
        if (passes(mid)) {
          last_pass = mid;
        } else {
          first_fail = mid;
        }
      }
    }
    k_hat = last_pass;
  }
  res.k_hat = k_hat;

  for (const auto &p : res.probes) {
    if (p.k < k_hat && !p.passed()) {
      res.non_monotone_flag = true;
    }
    if ((p.k == k_hat || p.k == k_hat + 1) && p.by_point_estimate) {
      res.degraded_confidence = true;
    }
  }

  res.k_hat_lo = k_hat;
  res.k_hat_hi = k_hat;
  if (budget.m_sensitivity && res.M_used.half_width > 0.0) {
    for (const double m_alt : {res.M_used.mean - res.M_used.half_width, res.M_used.mean + res.M_used.half_width}) {
      if (!(m_alt > 0.0)) {
        continue;
      }
      if (k_hat >= 1) {
        const auto p = run_probe(body, k_hat, epsilon, m_alt, rule, budget.sections_per_k,
                                 budget.max_extra_rounds, cfg, rng);
        if (!p.passed()) {
          res.k_hat_lo = std::min(res.k_hat_lo, k_hat - 1);
        }
      }
      if (k_hat < n) {
        const auto p = run_probe(body, k_hat + 1, epsilon, m_alt, rule, budget.sections_per_k,
                                 budget.max_extra_rounds, cfg, rng);
        if (p.passed()) {
          res.k_hat_hi = std::max(res.k_hat_hi, k_hat + 1);
        }
      }
    }
  }

  res.theory = theory_ratio(body, res.M_used, res.b_used, n);
  res.ratio = static_cast<double>(k_hat) / res.theory;
  return res;
}

Lemma1Check lemma1_check(std::size_t n, std::size_t k, double t, std::size_t n_samples, double c2,
                         const RngStream &rng) {
  if (n == 0 || k == 0 || k > n) {
    throw UsageError("lemma1_check: need 1 <= k <= n");
  }
  if (!(t > 0.0) || !(c2 > 0.0) || n_samples == 0) {
    throw UsageError("lemma1_check: t, c2 and n_samples must be positive");
  }
  const auto parts = parallel_map((n_samples + kReplicaChunk - 1) / kReplicaChunk, [&](std::size_t r) {
    auto stream = rng.replica(r);
    std::vector<double> x(n);
    const std::size_t begin = r * kReplicaChunk;
    const std::size_t end = std::min(n_samples, begin + kReplicaChunk);
    std::uint64_t below = 0;
    for (std::size_t i = begin; i < end; ++i) {
      sphere_uniform_into(x, stream);
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        s += x[j] * x[j];
      }
      const double norm = k == n ? 1.0 : std::sqrt(s);
      below += norm < t ? 1 : 0;
    }
    return below;
  });
  std::uint64_t below = 0;
  for (auto b : parts) {
    below += b;
  }
  Lemma1Check out;
  out.below_t = wilson_ci(below, n_samples, kSectionConfidence);
  out.premise_holds = out.below_t.lo > 0.5;
  out.conclusion_holds = static_cast<double>(k) < c2 * t * t * static_cast<double>(n);
  out.violated = out.premise_holds && !out.conclusion_holds;
  return out;
}

double theory_ratio(const BodySpec &body, const EstimateCI &M, double b, std::size_t n) {
  if (n != dimension(body)) {
    throw UsageError("theory_ratio: n does not match the body dimension");
  }
  if (!(b > 0.0) || !(M.mean > 0.0)) {
    throw UsageError("theory_ratio: need b > 0 and M > 0");
  }
  const double r = M.mean / b;
  return static_cast<double>(n) * r * r;
}

} // namespace dvlab
