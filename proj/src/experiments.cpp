#include "dvlab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dvlab/errors.hpp"
#include "dvlab/estimators.hpp"
#include "dvlab/parallel.hpp"

namespace dvlab {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t as_int(std::size_t v) { return static_cast<std::int64_t>(v); }

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void stamp(ResultTable &table, const char *experiment, std::string body, nlohmann::json params,
           std::uint64_t seed, Clock::time_point started) {
  table.manifest.experiment = experiment;
  table.manifest.body = std::move(body);
  table.manifest.params = std::move(params);
  table.manifest.master_seed = seed;
  table.manifest.workers = worker_count();
  table.manifest.wall_seconds = std::chrono::duration<double>(Clock::now() - started).count();
}

void check_nk(std::size_t n, std::size_t k) {
  if (n == 0 || k == 0 || k > n) {
    throw UsageError("need 1 <= k <= n (got n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
}

double ratio_or_nan(double a, double b) { return b != 0.0 ? a / b : std::numeric_limits<double>::quiet_NaN(); }

} // namespace

SearchBudget SearchParams::budget() const {
  SearchBudget b;
  b.sections_per_k = sections;
  b.max_extra_rounds = max_rounds;
  b.M_samples = m_samples;
  b.m_sensitivity = m_sensitivity;
  return b;
}

ExtremaConfig SearchParams::extrema() const {
  ExtremaConfig c;
  c.n_net = net;
  c.refine = refine;
  return c;
}

std::vector<double> default_tail_grid(std::size_t n) {
  std::vector<double> grid;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 2; i <= 10; ++i) {
    grid.push_back(0.25 * i * scale);
  }
  return grid;
}

std::vector<std::size_t> default_lemma1_k_grid(std::size_t n) {
  static constexpr std::size_t kBase[] = {1, 2, 3, 4, 5, 6, 8, 10, 12, 14, 16, 20, 25, 30, 35, 40, 45, 50};
  const std::size_t cap = std::max<std::size_t>(1, n / 2);
  std::vector<std::size_t> grid;
  for (std::size_t k : kBase) {
    if (k <= cap) {
      grid.push_back(k);
    }
  }
  if (grid.back() != cap) {
    grid.push_back(cap);
  }
  return grid;
}

ResultTable cmd_moments(const MomentsParams &p) {
  const auto started = Clock::now();
  check_nk(p.n, p.k);
  const auto m = proj_moments(p.n, p.k, p.samples, RngStream(p.seed, 0));
  const double target = static_cast<double>(p.k) / static_cast<double>(p.n);
  const double se = m.mean_sq.stddev / std::sqrt(static_cast<double>(m.mean_sq.n_samples));
  double z = 0.0;
  if (se > 0.0) {
    z = (m.mean_sq.mean - target) / se;
  } else if (m.mean_sq.mean != target) {
    z = std::copysign(std::numeric_limits<double>::infinity(), m.mean_sq.mean - target);
  }

  ResultTable t({"n", "k", "samples", "mean_abs", "mean_abs_hw", "mean_sq", "mean_sq_hw", "k_over_n", "z_mean_sq"});
  t.add_row({as_int(p.n), as_int(p.k), as_int(p.samples), m.mean_abs.mean, m.mean_abs.half_width, m.mean_sq.mean,
             m.mean_sq.half_width, target, z});
  t.add_summary("z_mean_sq", z);
  stamp(t, "moments", "", p, p.seed, started);
  return t;
}

ResultTable cmd_tails(const TailsParams &p) {
  const auto started = Clock::now();
  check_nk(p.n, p.k);
  const std::vector<double> grid = p.t_grid.empty() ? default_tail_grid(p.n) : p.t_grid;

  TailTable table;
  if (p.synthetic_c0 > 0.0) {
    table.n = p.n;
    table.k = p.k;
    for (double tv : grid) {
      const double tail = 4.0 * std::exp(-p.synthetic_c0 * tv * tv * static_cast<double>(p.n));
      table.points.push_back({tv, tail, 0, false});
    }
  } else {
    table = tail_table(p.n, p.k, grid, p.samples, RngStream(p.seed, 0));
  }

  ResultTable t({"t", "t2n", "tail", "count", "neg_log_tail_over_4", "fit", "used"});
  std::optional<TailFit> fit;
  try {
    fit = fit_concentration(table);
  } catch (const InsufficientData &e) {
    t.add_warning(e.what());
    t.set_numerical_failure();
  }
  for (const auto &pt : table.points) {
    const double t2n = pt.t * pt.t * static_cast<double>(p.n);
    const double y = pt.zero ? std::numeric_limits<double>::quiet_NaN() : -std::log(pt.tail / 4.0);
    const double line = fit ? fit->c0_hat * t2n : std::numeric_limits<double>::quiet_NaN();
    t.add_row({pt.t, t2n, pt.tail, static_cast<std::int64_t>(pt.count), y, line,
               std::int64_t{fit && !pt.zero ? 1 : 0}});
  }
  t.add_summary("n", as_int(p.n));
  t.add_summary("k", as_int(p.k));
  t.add_summary("sample_mean", table.sample_mean);
  t.add_summary("c0_hat", fit ? fit->c0_hat : std::numeric_limits<double>::quiet_NaN());
  t.add_summary("r_squared", fit ? fit->r_squared : std::numeric_limits<double>::quiet_NaN());
  t.add_summary("synthetic", std::int64_t{p.synthetic_c0 > 0.0 ? 1 : 0});
  stamp(t, "tails", "", p, p.seed, started);
  return t;
}

ResultTable cmd_equidist(const EquidistParams &p) {
  const auto started = Clock::now();
  check_nk(p.n, p.k);
  const std::size_t k_haar = p.mismatch ? p.k + 1 : p.k;
  check_nk(p.n, k_haar);
  if (p.samples < 10 || p.n_seeds == 0) {
    throw UsageError("equidist: need samples >= 10 and n_seeds >= 1");
  }
  const RngStream root(p.seed, 0);
  ResultTable t({"seed_index", "statistic", "p_value", "reject"});
  std::size_t rejections = 0;
  for (std::size_t s = 0; s < p.n_seeds; ++s) {
    const auto samples = equidist_samples(p.n, p.k, p.samples, root.replica(s), k_haar);
    const auto ks = ks_two_sample(samples.fixed_subspace, samples.random_subspace);
    const bool reject = ks.p_value < p.alpha;
    rejections += reject ? 1 : 0;
    t.add_row({as_int(s), ks.statistic, ks.p_value, std::int64_t{reject ? 1 : 0}});
  }
  t.add_summary("k_fixed", as_int(p.k));
  t.add_summary("k_haar", as_int(k_haar));
  t.add_summary("alpha", p.alpha);
  t.add_summary("rejections", as_int(rejections));
  t.add_summary("rejection_fraction", static_cast<double>(rejections) / static_cast<double>(p.n_seeds));
  stamp(t, "equidist", "", p, p.seed, started);
  return t;
}

ResultTable cmd_kdim(const KdimParams &p) {
  const auto started = Clock::now();
  const BodySpec body = parse_body(p.body);
  const auto rule = parse_threshold(p.search.threshold);
  const auto r = dvoretzky_dimension(body, p.search.eps, rule, p.search.budget(), p.search.extrema(),
                                     RngStream(p.search.seed, 0));

  ResultTable t({"k", "p_hat", "lo", "hi", "threshold", "decision", "n_sections", "by_point_estimate"});
  for (const auto &probe : r.probes) {
    t.add_row({as_int(probe.k), probe.p_hat.mean, probe.p_hat.lo, probe.p_hat.hi, probe.threshold,
               std::string(to_string(probe.decision)), as_int(probe.n_sections),
               std::int64_t{probe.by_point_estimate ? 1 : 0}});
  }
  t.add_summary("k_hat", as_int(r.k_hat));
  t.add_summary("k_hat_lo", as_int(r.k_hat_lo));
  t.add_summary("k_hat_hi", as_int(r.k_hat_hi));
  t.add_summary("n", as_int(dimension(body)));
  t.add_summary("M", r.M_used.mean);
  t.add_summary("M_half_width", r.M_used.half_width);
  t.add_summary("b", r.b_used);
  t.add_summary("n_M_over_b_sq", r.theory);
  t.add_summary("ratio", r.ratio);
  t.add_summary("non_monotone", std::int64_t{r.non_monotone_flag ? 1 : 0});
  t.add_summary("degraded_confidence", std::int64_t{r.degraded_confidence ? 1 : 0});
  stamp(t, "kdim", body_to_text(body), p, p.search.seed, started);
  return t;
}

ResultTable cmd_scaling(const ScalingParams &p) {
  const auto started = Clock::now();
  if (p.bodies.empty()) {
    throw UsageError("scaling: at least one body is required");
  }
  const auto rule = parse_threshold(p.search.threshold);
  const RngStream root(p.search.seed, 0);
  ResultTable t({"body", "n", "M", "M_half_width", "b", "n_M_over_b_sq", "k_hat", "ratio"});
  double rmax = -std::numeric_limits<double>::infinity();
  double rmin = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> khats;
  for (const auto &text : p.bodies) {
    const BodySpec body = parse_body(text);
    const auto r = dvoretzky_dimension(body, p.search.eps, rule, p.search.budget(), p.search.extrema(), root);
    t.add_row({body_to_text(body), as_int(dimension(body)), r.M_used.mean, r.M_used.half_width, r.b_used, r.theory,
               as_int(r.k_hat), r.ratio});
    rmax = std::max(rmax, r.ratio);
    rmin = std::min(rmin, r.ratio);
    khats.push_back(r.k_hat);
  }
  t.add_summary("ratio_max", rmax);
  t.add_summary("ratio_min", rmin);
  t.add_summary("ratio_spread", ratio_or_nan(rmax, rmin));
  t.add_summary("k_hat_growth",
                ratio_or_nan(static_cast<double>(khats.back()), static_cast<double>(khats.front())));
  std::string bodies;
  for (const auto &b : p.bodies) {
    bodies += (bodies.empty() ? "" : ";") + b;
  }
  stamp(t, "scaling", bodies, p, p.search.seed, started);
  return t;
}

ResultTable cmd_remark2(const Remark2Params &p) {
  const auto started = Clock::now();
  if (p.l_list.empty() || p.eps_list.empty()) {
    throw UsageError("remark2: l list and epsilon list must be nonempty");
  }
  const auto rule = parse_threshold(p.search.threshold);
  const RngStream root(p.search.seed, 0);
  ResultTable t({"l", "eps", "R", "M", "b", "n_M_over_b_sq", "theory_over_l", "k_hat", "k_hat_over_l"});

  // k_hat[l index][eps index]
  std::vector<std::vector<std::size_t>> khat(p.l_list.size(), std::vector<std::size_t>(p.eps_list.size()));
  double tl_min = std::numeric_limits<double>::infinity();
  double tl_max = -std::numeric_limits<double>::infinity();
  for (std::size_t li = 0; li < p.l_list.size(); ++li) {
    const std::size_t l = p.l_list[li];
    if (l == 0 || l > p.n) {
      throw UsageError("remark2: every l must satisfy 1 <= l <= n");
    }
    const double R = std::sqrt(static_cast<double>(p.n) / static_cast<double>(l));
    const BodySpec body = PolarHull{p.n, R};
    // Same probe seeds across epsilon for a given l.
    const RngStream stream = root.fork(l);
    for (std::size_t ei = 0; ei < p.eps_list.size(); ++ei) {
      const double eps = p.eps_list[ei];
      const auto r = dvoretzky_dimension(body, eps, rule, p.search.budget(), p.search.extrema(), stream);
      const double ld = static_cast<double>(l);
      khat[li][ei] = r.k_hat;
      tl_min = std::min(tl_min, r.theory / ld);
      tl_max = std::max(tl_max, r.theory / ld);
      t.add_row({as_int(l), eps, R, r.M_used.mean, r.b_used, r.theory, r.theory / ld, as_int(r.k_hat),
                 static_cast<double>(r.k_hat) / ld});
    }
  }
  t.add_summary("theory_over_l_min", tl_min);
  t.add_summary("theory_over_l_max", tl_max);
  // Growth of k_hat from the smallest to the largest l, per epsilon.
  const auto [lmin_it, lmax_it] = std::minmax_element(p.l_list.begin(), p.l_list.end());
  const auto lmin = static_cast<std::size_t>(lmin_it - p.l_list.begin());
  const auto lmax = static_cast<std::size_t>(lmax_it - p.l_list.begin());
  for (std::size_t ei = 0; ei < p.eps_list.size(); ++ei) {
    t.add_summary("k_hat_l_ratio[eps=" + fmt_g(p.eps_list[ei]) + "]",
                  ratio_or_nan(static_cast<double>(khat[lmax][ei]), static_cast<double>(khat[lmin][ei])));
  }
  // Spread of k_hat across epsilon, per l.
  for (std::size_t li = 0; li < p.l_list.size(); ++li) {
    const auto [lo, hi] = std::minmax_element(khat[li].begin(), khat[li].end());
    t.add_summary("k_hat_eps_spread[l=" + std::to_string(p.l_list[li]) + "]",
                  ratio_or_nan(static_cast<double>(*hi), static_cast<double>(*lo)));
  }
  stamp(t, "remark2", "polarhull:n=" + std::to_string(p.n), p, p.search.seed, started);
  return t;
}

ResultTable cmd_lemma1(const Lemma1Params &p) {
  const auto started = Clock::now();
  if (p.n_list.empty() || p.t_grid.empty()) {
    throw UsageError("lemma1: n list and t grid must be nonempty");
  }
  const RngStream root(p.seed, 0);
  ResultTable t({"n", "k", "t", "p_below", "p_below_lo", "premise", "conclusion", "violated"});
  std::size_t violations = 0, cells = 0, premises = 0;
  for (std::size_t n : p.n_list) {
    const auto k_grid = p.k_grid.empty() ? default_lemma1_k_grid(n) : p.k_grid;
    for (std::size_t k : k_grid) {
      check_nk(n, k);
      for (std::size_t ti = 0; ti < p.t_grid.size(); ++ti) {
        const double tv = p.t_grid[ti];
        // One stream per (n, k, t) cell, independent of c2.
        const RngStream cell = root.fork(n).fork(k).replica(ti);
        const auto r = lemma1_check(n, k, tv, p.samples, p.c2, cell);
        ++cells;
        premises += r.premise_holds ? 1 : 0;
        violations += r.violated ? 1 : 0;
        t.add_row({as_int(n), as_int(k), tv, r.below_t.mean, r.below_t.lo, std::int64_t{r.premise_holds},
                   std::int64_t{r.conclusion_holds}, std::int64_t{r.violated}});
      }
    }
  }
  t.add_summary("c2", p.c2);
  t.add_summary("cells", as_int(cells));
  t.add_summary("premise_cells", as_int(premises));
  t.add_summary("violations", as_int(violations));
  stamp(t, "lemma1", "", p, p.seed, started);
  return t;
}

ResultTable replay(const RunManifest &m) {
  const auto &j = m.params;
  if (m.experiment == "moments") {
    return cmd_moments(j.get<MomentsParams>());
  }
  if (m.experiment == "tails") {
    return cmd_tails(j.get<TailsParams>());
  }
  if (m.experiment == "equidist") {
    return cmd_equidist(j.get<EquidistParams>());
  }
  if (m.experiment == "kdim") {
    return cmd_kdim(j.get<KdimParams>());
  }
  if (m.experiment == "scaling") {
    return cmd_scaling(j.get<ScalingParams>());
  }
  if (m.experiment == "remark2") {
    return cmd_remark2(j.get<Remark2Params>());
  }
  if (m.experiment == "lemma1") {
    return cmd_lemma1(j.get<Lemma1Params>());
  }
  throw UsageError("replay: unknown experiment '" + m.experiment + "'");
}

} // namespace dvlab
