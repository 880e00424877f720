// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "dvlab/estimators.hpp"
#include "dvlab/experiments.hpp"
#include "dvlab/extrema.hpp"
#include "dvlab/parallel.hpp"
#include "oracles.hpp"

using namespace dvlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Tables produced by criteria 1-7, replayed under a different worker count
// for criterion 11.
std::vector<ResultTable> g_tables;

const ResultTable &keep(ResultTable t) {
  g_tables.push_back(std::move(t));
  return g_tables.back();
}

SearchParams search(double eps) {
  SearchParams s;
  s.eps = eps;
  s.threshold = "const:0.5";
  return s;
}

Outcome euclidean_identity() {
  KdimParams p;
  p.body = "euclidean:n=20";
  p.search = search(0.3);
  const auto &t = keep(cmd_kdim(p));
  const double k = t.summary_number("k_hat"), r = t.summary_number("ratio");
  return {k == 20.0 && r == 1.0, fmt("k_hat=%g ratio=%.3f", k, r)};
}

Outcome moment_identity() {
  const auto &first = keep(cmd_moments({100, 25, 100000, 0}));
  const double z0 = first.summary_number("z_mean_sq");
  int exceed = 0;
  double zmax = 0.0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const auto &t = keep(cmd_moments({100, 25, 100000, s}));
    const double z = std::abs(t.summary_number("z_mean_sq"));
    zmax = std::max(zmax, z);
    exceed += z >= 3.0;
  }
  return {std::abs(z0) < 3.0 && exceed <= 1,
          fmt("z=%.3f, %d of 20 seeds with |z|>=3 (max |z|=%.2f)", z0, exceed, zmax)};
}

Outcome equidistribution() {
  EquidistParams p;
  const auto &null = keep(cmd_equidist(p));
  p.mismatch = true;
  p.seed = 1;
  const auto &alt = keep(cmd_equidist(p));
  const double f0 = null.summary_number("rejection_fraction");
  const double f1 = alt.summary_number("rejection_fraction");
  return {f0 <= 0.05 && f1 >= 0.95, fmt("null rejection %.2f, mismatch rejection %.2f", f0, f1)};
}

Outcome concentration_tail() {
  TailsParams p;
  const auto &a = keep(cmd_tails(p));
  p.n = 200;
  p.k = 50;
  const auto &b = keep(cmd_tails(p));
  const double r2 = a.summary_number("r_squared");
  const double ca = a.summary_number("c0_hat"), cb = b.summary_number("c0_hat");
  const double q = cb / ca;
  return {r2 >= 0.95 && q >= 0.5 && q <= 2.0 && !a.numerical_failure() && !b.numerical_failure(),
          fmt("r2=%.4f c0_hat(100)=%.3f c0_hat(200)=%.3f (r2=%.4f) ratio=%.3f", r2, ca, cb,
              b.summary_number("r_squared"), q)};
}

Outcome lemma1_falsifier() {
  Lemma1Params p;
  p.c2 = 8.0;
  const auto &strict = keep(cmd_lemma1(p));
  p.c2 = 0.5;
  const auto &loose = keep(cmd_lemma1(p));
  const double v8 = strict.summary_number("violations"), v05 = loose.summary_number("violations");
  return {v8 == 0.0 && v05 >= 1.0, fmt("%g cells; violations c2=8: %g, c2=0.5: %g",
                                       strict.summary_number("cells"), v8, v05)};
}

Outcome linf_scaling() {
  ScalingParams p;
  p.bodies = {"lp:n=64,p=inf", "lp:n=256,p=inf"};
  p.search = search(0.5);
  const auto &t = keep(cmd_scaling(p));
  const double spread = t.summary_number("ratio_spread");
  const double growth = t.summary_number("k_hat_growth");
  return {spread <= 3.0 && growth >= 1.0 && growth <= 2.5,
          fmt("k_hat=%g,%g ratios=%.3f,%.3f spread=%.3f growth=%.3f", as_number(t.at(0, "k_hat")),
              as_number(t.at(1, "k_hat")), as_number(t.at(0, "ratio")), as_number(t.at(1, "ratio")), spread,
              growth)};
}

Outcome remark2() {
  Remark2Params p;
  p.search = search(0.5);
  const auto &t = keep(cmd_remark2(p));
  bool ok = t.summary_number("theory_over_l_min") >= 1.0 / 3.0 && t.summary_number("theory_over_l_max") <= 3.0;
  std::string detail = fmt("theory/l in [%.3f, %.3f]", t.summary_number("theory_over_l_min"),
                           t.summary_number("theory_over_l_max"));
  for (const auto &[key, value] : t.summary()) {
    const double v = as_number(value);
    if (key.starts_with("k_hat_l_ratio")) {
      ok = ok && v >= 2.0 && v <= 8.0;
      detail += fmt("; %s=%.3f", key.c_str(), v);
    } else if (key.starts_with("k_hat_eps_spread")) {
      ok = ok && v <= 3.0;
      detail += fmt("; %s=%.3f", key.c_str(), v);
    }
  }
  return {ok, detail};
}

std::vector<BodySpec> norm_bodies(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed, n);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n + 16; ++i) {
    rows.push_back(sphere_uniform(n, rng));
  }
  const double root_n = std::sqrt(static_cast<double>(n));
  return {Euclidean{n},
          LpBall{n, 1.0},
          LpBall{n, 1.5},
          LpBall{n, 2.0},
          LpBall{n, 3.0},
          LpBall{n, 8.0},
          LpBall::infinity(n),
          SymPolytope::cube(n),
          SymPolytope(n, rows),
          PolarHull{n, 1.0},
          PolarHull{n, std::max(1.0, root_n / 2.0)},
          PolarHull{n, root_n},
          PolarHull{n, static_cast<double>(n)}};
}

Outcome gauge_properties() {
  std::size_t failures = 0, checks = 0;
  for (std::size_t n : {8u, 64u}) {
    for (const auto &body : norm_bodies(n, 8)) {
      RngStream rng(80, n);
      std::vector<double> neg(n), sum(n), scaled(n);
      for (int t = 0; t < 10000; ++t) {
        auto x = sphere_uniform(n, rng);
        const auto y = sphere_uniform(n, rng);
        const double sx = std::exp(4.0 * (rng.uniform() - 0.5));
        const double lambda = 10.0 * rng.uniform();
        for (std::size_t i = 0; i < n; ++i) {
          x[i] *= sx;
        }
        for (std::size_t i = 0; i < n; ++i) {
          neg[i] = -x[i];
          sum[i] = x[i] + y[i];
          scaled[i] = lambda * x[i];
        }
        const double gx = gauge_eval(body, x), gy = gauge_eval(body, y);
        const bool even = gauge_eval(body, neg) == gx;
        const bool homog = std::abs(gauge_eval(body, scaled) - lambda * gx) <= 1e-12 * lambda * gx;
        const bool tri = gauge_eval(body, sum) <= gx + gy + 1e-9 * (gx + gy);
        failures += !even + !homog + !tri;
        checks += 3;
      }
    }
  }
  double worst = 0.0;
  RngStream rng(81, 0);
  for (int t = 0; t < 1000; ++t) {
    const double R = 1.0 + 4.0 * rng.uniform();
    auto x = sphere_uniform(8, rng);
    const double s = std::exp(2.0 * (rng.uniform() - 0.5));
    for (double &v : x) {
      v *= s;
    }
    worst = std::max(worst, std::abs(gauge_eval(PolarHull{8, R}, x) - oracle::polar_hull_gauge_by_bisection(x, R, rng)));
  }
  return {failures == 0 && worst <= 1e-6,
          fmt("%zu of %zu axiom checks failed; polar hull max |gauge - oracle| = %.2e", failures, checks, worst)};
}

Outcome extrema_brackets() {
  RngStream rng(90, 0);
  std::size_t over = 0, under = 0;
  double worst_ratio = 1.0, worst_excess = -1.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + trial % 10;
    const std::size_t n = k + 1 + static_cast<std::size_t>(rng.uniform() * 40.0);
    BodySpec body = Euclidean{n};
    switch (trial % 3) {
    case 0:
      body = LpBall::infinity(n);
      break;
    case 1:
      body = PolarHull{n, 1.0 + 3.0 * rng.uniform()};
      break;
    default:
      break;
    }
    const auto basis = haar_basis(n, k, rng);
    const double sup = *exact_sup(body, basis);
    ExtremaConfig raw_cfg;
    raw_cfg.use_exact = false;
    raw_cfg.refine = false;
    ExtremaConfig ref_cfg = raw_cfg;
    ref_cfg.refine = true;
    RngStream a = rng.replica(trial), b = rng.replica(trial);
    const double raw = sample_extrema(body, basis, raw_cfg, a).max_val;
    const double refined = sample_extrema(body, basis, ref_cfg, b).max_val;
    over += std::max(raw, refined) > sup + 1e-12;
    under += refined < 0.99 * sup;
    worst_ratio = std::min(worst_ratio, refined / sup);
    worst_excess = std::max(worst_excess, std::max(raw, refined) - sup);
  }
  return {over == 0 && under == 0,
          fmt("1000 trials: %zu above exact sup (max excess %.2e), %zu refined below 0.99 sup (min ratio %.5f)", over,
              worst_excess, under, worst_ratio)};
}

Outcome m_over_b_floor() {
  double worst = 1e300;
  std::string worst_body;
  for (std::size_t n : {2u, 8u, 64u, 512u}) {
    for (const auto &body : norm_bodies(n, 10)) {
      const std::size_t samples = n >= 512 ? 4000 : 20000;
      const auto M = estimate_M(body, samples, 0.99, RngStream(100, n));
      const double v = M.mean / b_exact(body) * std::sqrt(static_cast<double>(n));
      if (v < worst) {
        worst = v;
        worst_body = body_to_text(body);
      }
    }
  }
  return {worst >= 0.25, fmt("min M/b*sqrt(n) = %.4f (%s)", worst, worst_body.c_str())};
}

Outcome reproducibility() {
  set_worker_count(4);
  std::size_t differ = 0;
  for (const auto &t : g_tables) {
    differ += !replay(t.manifest).same_values(t);
  }
  set_worker_count(1);
  return {differ == 0 && !g_tables.empty(),
          fmt("%zu of %zu runs replayed with 4 workers differ from the 1-worker run", differ, g_tables.size())};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char *name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "euclidean identity", 30, euclidean_identity},
      {2, "moment identity", 60, moment_identity},
      {3, "equi-distribution", 180, equidistribution},
      {4, "concentration tail", 180, concentration_tail},
      {5, "projection-norm implication sweep", 300, lemma1_falsifier},
      {6, "l_inf two-sided scaling", 300, linf_scaling},
      {7, "polar hull family", 300, remark2},
      {8, "gauge properties", 60, gauge_properties},
      {9, "extrema brackets", 120, extrema_brackets},
      {10, "M/b floor", 60, m_over_b_floor},
      {11, "reproducibility across worker counts", 0, reproducibility},
  };
  set_worker_count(1);
  int failed = 0;
  for (const auto &c : criteria) {
    const auto started = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - started).count();
    const bool in_time = c.limit_seconds <= 0 || secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("criterion %2d %s: %s (%.1f s%s)\n", c.id, pass ? "PASS" : "FAIL", c.name, secs,
                in_time ? "" : ", over time limit");
    std::printf("             %s\n", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
