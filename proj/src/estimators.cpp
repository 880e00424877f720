#include "dvlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dvlab/errors.hpp"
#include "dvlab/parallel.hpp"
#include "dvlab/randgeom.hpp"

namespace dvlab {

namespace {

constexpr std::uint64_t kTagFixedSide = 0xA11CE;
constexpr std::uint64_t kTagHaarSide = 0xB0B;

// Running mean / sum of squared deviations (Welford), merged with Chan's
// pairwise update in replica order.
struct Moments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    ++count;
    const double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }

  void merge(const Moments &o) {
    if (o.count == 0) {
      return;
    }
    if (count == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = na + nb;
    mean += d * nb / n;
    m2 += o.m2 + d * d * na * nb / n;
    count += o.count;
  }

  double stddev() const { return count > 1 ? std::sqrt(m2 / static_cast<double>(count - 1)) : 0.0; }
};

std::size_t replica_count(std::size_t n_samples) { return (n_samples + kReplicaChunk - 1) / kReplicaChunk; }

std::pair<std::size_t, std::size_t> replica_range(std::size_t r, std::size_t n_samples) {
  const std::size_t begin = r * kReplicaChunk;
  return {begin, std::min(n_samples, begin + kReplicaChunk)};
}

void check_nk(std::size_t n, std::size_t k, const char *who) {
  if (n == 0 || k == 0 || k > n) {
    throw UsageError(std::string(who) + ": need 1 <= k <= n");
  }
}

// |P_k x| for the coordinate projection onto the first k axes of a unit x.
double coordinate_proj_norm(std::span<const double> x, std::size_t k) {
  if (k == x.size()) {
    return 1.0;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    s += x[i] * x[i];
  }
  return std::sqrt(s);
}

// Fills out[i] = f(x_i) for n_samples sphere points, replica by replica.
template <class F>
std::vector<double> sample_sphere_map(std::size_t n, std::size_t n_samples, const RngStream &rng, F f) {
  std::vector<double> out(n_samples);
  parallel_for(replica_count(n_samples), [&](std::size_t r) {
    auto stream = rng.replica(r);
    std::vector<double> x(n);
    const auto [begin, end] = replica_range(r, n_samples);
    for (std::size_t i = begin; i < end; ++i) {
      sphere_uniform_into(x, stream);
      out[i] = f(std::span<const double>(x));
    }
  });
  return out;
}

} // namespace

EstimateCI estimate_M(const BodySpec &body, std::size_t n_samples, double confidence, const RngStream &rng) {
  require_norm(body, "estimate_M");
  if (n_samples < 2) {
    throw UsageError("estimate_M: need at least 2 samples");
  }
  if (std::holds_alternative<Euclidean>(body)) {
    // The gauge is identically 1 on the sphere.
    return {1.0, 0.0, n_samples, confidence, 1.0, 1.0, 0.0};
  }
  const std::size_t n = dimension(body);
  const auto parts = parallel_map(replica_count(n_samples), [&](std::size_t r) {
    auto stream = rng.replica(r);
    std::vector<double> x(n);
    Moments m;
    const auto [begin, end] = replica_range(r, n_samples);
    for (std::size_t i = begin; i < end; ++i) {
      sphere_uniform_into(x, stream);
      m.push(gauge_eval(body, x));
    }
    return m;
  });
  Moments total;
  for (const auto &p : parts) {
    total.merge(p);
  }
  return normal_ci(total.mean, total.stddev(), total.count, confidence);
}

ProjMoments proj_moments(std::size_t n, std::size_t k, std::size_t n_samples, const RngStream &rng,
                         double confidence) {
  check_nk(n, k, "proj_moments");
  if (n_samples < 2) {
    throw UsageError("proj_moments: need at least 2 samples");
  }
  struct Pair {
    Moments abs, sq;
  };
  const auto parts = parallel_map(replica_count(n_samples), [&](std::size_t r) {
    auto stream = rng.replica(r);
    std::vector<double> x(n);
    Pair p;
    const auto [begin, end] = replica_range(r, n_samples);
    for (std::size_t i = begin; i < end; ++i) {
      sphere_uniform_into(x, stream);
      const double a = coordinate_proj_norm(x, k);
      p.abs.push(a);
      p.sq.push(a * a);
    }
    return p;
  });
  Pair total;
  for (const auto &p : parts) {
    total.abs.merge(p.abs);
    total.sq.merge(p.sq);
  }
  return {normal_ci(total.abs.mean, total.abs.stddev(), total.abs.count, confidence),
          normal_ci(total.sq.mean, total.sq.stddev(), total.sq.count, confidence)};
}

TailTable tail_table(std::size_t n, std::size_t k, std::span<const double> t_grid, std::size_t n_samples,
                     const RngStream &rng) {
  check_nk(n, k, "tail_table");
  if (n_samples == 0) {
    throw UsageError("tail_table: need at least one sample");
  }
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
    throw UsageError("tail_table: t grid must be non-decreasing");
  }
  const auto values =
      sample_sphere_map(n, n_samples, rng, [k](std::span<const double> x) { return coordinate_proj_norm(x, k); });

  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const double mean = sum / static_cast<double>(n_samples);

  std::vector<double> dev(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    dev[i] = std::abs(values[i] - mean);
  }
  std::sort(dev.begin(), dev.end());

  TailTable table{n, k, n_samples, mean, {}};
  for (double t : t_grid) {
    // Number of deviations >= t.
    const auto first = std::lower_bound(dev.begin(), dev.end(), t);
    const auto count = static_cast<std::uint64_t>(dev.end() - first);
    table.points.push_back(
        {t, static_cast<double>(count) / static_cast<double>(n_samples), count, count == 0});
  }
  return table;
}

TailFit fit_concentration(const TailTable &table) {
  TailFit fit;
  double sxy = 0.0, sxx = 0.0;
  for (const auto &p : table.points) {
    if (p.zero || !(p.tail > 0.0)) {
      continue;
    }
    const double x = p.t * p.t * static_cast<double>(table.n);
    const double y = -std::log(p.tail / 4.0);
    fit.points.push_back({p.t, x, p.tail});
    sxy += x * y;
    sxx += x * x;
  }
  if (fit.points.size() < 3 || !(sxx > 0.0)) {
    throw InsufficientData("fit_concentration: fewer than 3 points with nonzero tail");
  }
  fit.c0_hat = sxy / sxx;
  double ss_res = 0.0, ss_tot = 0.0;
  for (const auto &p : fit.points) {
    const double y = -std::log(p.tail / 4.0);
    const double r = y - fit.c0_hat * p.t2n;
    ss_res += r * r;
    ss_tot += y * y;
  }
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

EquidistSamples equidist_samples(std::size_t n, std::size_t k, std::size_t n_samples, const RngStream &rng,
                                 std::size_t k_haar) {
  check_nk(n, k, "equidist_samples");
  if (k_haar == 0) {
    k_haar = k;
  }
  check_nk(n, k_haar, "equidist_samples");

  EquidistSamples out;
  out.fixed_subspace = sample_sphere_map(n, n_samples, rng.fork(kTagFixedSide),
                                         [k](std::span<const double> x) { return coordinate_proj_norm(x, k); });

  const RngStream haar_rng = rng.fork(kTagHaarSide);
  out.random_subspace.resize(n_samples);
  std::vector<double> e1(n, 0.0);
  e1[0] = 1.0;
  parallel_for(replica_count(n_samples), [&](std::size_t r) {
    auto stream = haar_rng.replica(r);
    const auto [begin, end] = replica_range(r, n_samples);
    for (std::size_t i = begin; i < end; ++i) {
      out.random_subspace[i] = proj_norm(haar_basis(n, k_haar, stream), e1);
    }
  });
  return out;
}

} // namespace dvlab
