#include "dvlab/extrema.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "dvlab/errors.hpp"

namespace dvlab {

namespace {

constexpr double kFiniteDiffStep = 1e-5;

double row_norm(const SubspaceBasis &basis, std::size_t row) {
  double s = 0.0;
  for (std::size_t j = 0; j < basis.k(); ++j) {
    const double v = basis.at(row, j);
    s += v * v;
  }
  return std::sqrt(s);
}

void normalize(std::span<double> y) {
  const double len = euclidean_norm(y);
  for (double &v : y) {
    v /= len;
  }
}

struct Candidate {
  double value;
  std::size_t index;
  std::vector<double> point;
};

// Keeps the `cap` best candidates; "better" is larger value for max and
// smaller for min, ties broken by lower net index.
class TopCandidates {
public:
  TopCandidates(std::size_t cap, SearchMode mode) : cap_(cap), mode_(mode) {}

  bool better(double a, std::size_t ia, double b, std::size_t ib) const {
    if (a != b) {
      return mode_ == SearchMode::max ? a > b : a < b;
    }
    return ia < ib;
  }

  void offer(double value, std::size_t index, std::span<const double> point) {
    if (items_.size() == cap_ && !better(value, index, items_.back().value, items_.back().index)) {
      return;
    }
    Candidate c{value, index, {point.begin(), point.end()}};
    auto pos = std::find_if(items_.begin(), items_.end(),
                            [&](const Candidate &o) { return better(value, index, o.value, o.index); });
    items_.insert(pos, std::move(c));
    if (items_.size() > cap_) {
      items_.pop_back();
    }
  }

  const std::vector<Candidate> &items() const { return items_; }

private:
  std::size_t cap_;
  SearchMode mode_;
  std::vector<Candidate> items_;
};

} // namespace

const char *to_string(ExtremaMethod m) {
  switch (m) {
  case ExtremaMethod::exact:
    return "exact";
  case ExtremaMethod::sampled:
    return "sampled";
  case ExtremaMethod::sampled_refined:
    return "sampled_refined";
  }
  return "?";
}

std::optional<double> exact_sup(const BodySpec &body, const SubspaceBasis &basis) {
  if (basis.n() != dimension(body)) {
    throw UsageError("exact_sup: basis and body dimensions differ");
  }
  if (basis.k() == 1) {
    return gauge_eval(body, basis.column(0));
  }
  if (std::holds_alternative<Euclidean>(body)) {
    return 1.0;
  }
  if (const auto *lp = std::get_if<LpBall>(&body)) {
    if (lp->is_infinite()) {
      // l_inf is the polytope with functionals e_i; |V^T e_i| is row i's norm.
      double best = 0.0;
      for (std::size_t i = 0; i < basis.n(); ++i) {
        best = std::max(best, row_norm(basis, i));
      }
      return best;
    }
    if (lp->p == 2.0) {
      return 1.0;
    }
    return std::nullopt;
  }
  if (const auto *poly = std::get_if<SymPolytope>(&body)) {
    double best = 0.0;
    for (std::size_t i = 0; i < poly->m(); ++i) {
      best = std::max(best, proj_norm(basis, poly->functional(i)));
    }
    return best;
  }
  const auto &hull = std::get<PolarHull>(body);
  return std::max(1.0, hull.R * row_norm(basis, 0));
}

std::optional<double> exact_inf(const BodySpec &body, const SubspaceBasis &basis) {
  if (basis.n() != dimension(body)) {
    throw UsageError("exact_inf: basis and body dimensions differ");
  }
  if (basis.k() == 1) {
    return gauge_eval(body, basis.column(0));
  }
  if (std::holds_alternative<Euclidean>(body)) {
    return 1.0;
  }
  if (const auto *lp = std::get_if<LpBall>(&body); lp && !lp->is_infinite() && lp->p == 2.0) {
    return 1.0;
  }
  if (std::holds_alternative<PolarHull>(body)) {
    // A unit vector of V orthogonal to P_V e_1 has x_1 = 0, so gauge 1.
    return 1.0;
  }
  return std::nullopt;
}

LocalOptimum refine_local(const BodySpec &body, const SubspaceBasis &basis, std::span<const double> start,
                          SearchMode mode, double tol, int max_iter) {
  const std::size_t k = basis.k();
  if (start.size() != k) {
    throw UsageError("refine_local: start point has wrong dimension");
  }
  std::vector<double> scratch(basis.n());
  LocalOptimum out;
  out.point.assign(start.begin(), start.end());
  normalize(out.point);
  auto f = [&](std::span<const double> y) {
    ++out.n_evals;
    return gauge_on_section(body, basis, y, scratch);
  };
  out.value = f(out.point);
  if (k == 1) {
    return out;
  }

  const double sign = mode == SearchMode::max ? 1.0 : -1.0;
  std::vector<double> probe(k), grad(k), trial(k);
  double step = 0.05;
  for (int it = 0; it < max_iter; ++it) {
    probe = out.point;
    for (std::size_t i = 0; i < k; ++i) {
      probe[i] = out.point[i] + kFiniteDiffStep;
      const double up = f(probe);
      probe[i] = out.point[i] - kFiniteDiffStep;
      const double down = f(probe);
      probe[i] = out.point[i];
      grad[i] = sign * (up - down) / (2.0 * kFiniteDiffStep);
    }
    const double radial = dot(grad, out.point);
    for (std::size_t i = 0; i < k; ++i) {
      grad[i] -= radial * out.point[i];
    }
    const double gnorm = euclidean_norm(grad);
    if (!(gnorm > 0.0)) {
      break;
    }

    double s = std::min(1.0, 2.0 * step);
    bool improved = false;
    double trial_value = out.value;
    for (int tries = 0; tries < 50; ++tries, s *= 0.5) {
      for (std::size_t i = 0; i < k; ++i) {
        trial[i] = out.point[i] + s * grad[i] / gnorm;
      }
      normalize(trial);
      trial_value = f(trial);
      if (sign * (trial_value - out.value) > 0.0) {
        improved = true;
        break;
      }
    }
    if (!improved) {
      break;
    }
    const double gain = sign * (trial_value - out.value);
    out.point = trial;
    out.value = trial_value;
    ++out.iterations;
    step = s;
    if (gain < tol) {
      break;
    }
  }
  return out;
}

ExtremaResult sample_extrema(const BodySpec &body, const SubspaceBasis &basis, const ExtremaConfig &cfg,
                             RngStream &rng) {
  require_norm(body, "sample_extrema");
  const std::optional<double> sup = cfg.use_exact ? exact_sup(body, basis) : std::nullopt;
  const std::optional<double> inf = cfg.use_exact ? exact_inf(body, basis) : std::nullopt;
  if (sup && inf) {
    return {*inf, *sup, ExtremaMethod::exact, 0, true};
  }

  const std::size_t k = basis.k();
  if (k > kSampledExtremaMaxK) {
    throw UsageError("sample_extrema: k = " + std::to_string(k) + " exceeds the sampled-extrema cap of " +
                     std::to_string(kSampledExtremaMaxK));
  }
  if (cfg.restarts < 1 || cfg.refine_max_iter < 1 || !(cfg.refine_tol > 0.0)) {
    throw UsageError("sample_extrema: restarts, refine_max_iter and refine_tol must be positive");
  }

  const std::size_t n_net = cfg.net_size(k);
  const auto cap = static_cast<std::size_t>(cfg.restarts);
  TopCandidates top(cap, SearchMode::max);
  TopCandidates bottom(cap, SearchMode::min);
  std::vector<double> y(k), scratch(basis.n());
  ExtremaResult res;
  for (std::size_t i = 0; i < n_net; ++i) {
    sphere_uniform_into(y, rng);
    const double v = gauge_on_section(body, basis, y, scratch);
    if (!sup) {
      top.offer(v, i, y);
    }
    if (!inf) {
      bottom.offer(v, i, y);
    }
  }
  res.n_evals = n_net;
  if (!sup) {
    // Extra max candidate: the section's shadow of the body's maximizer.
    const auto u = max_direction(body);
    const auto w = proj_coords(basis, u);
    if (euclidean_norm(w) > 0.0) {
      std::vector<double> seed(w);
      normalize(seed);
      top.offer(gauge_on_section(body, basis, seed, scratch), n_net, seed);
      ++res.n_evals;
    }
  }
  res.method = ExtremaMethod::sampled;

  auto refine_side = [&](const TopCandidates &cands, SearchMode mode) {
    double best = cands.items().front().value;
    if (!cfg.refine) {
      return best;
    }
    for (const auto &c : cands.items()) {
      const auto opt = refine_local(body, basis, c.point, mode, cfg.refine_tol, cfg.refine_max_iter);
      res.n_evals += opt.n_evals;
      best = mode == SearchMode::max ? std::max(best, opt.value) : std::min(best, opt.value);
    }
    return best;
  };

  res.max_val = sup ? *sup : refine_side(top, SearchMode::max);
  res.min_val = inf ? *inf : refine_side(bottom, SearchMode::min);
  if (cfg.refine) {
    res.method = ExtremaMethod::sampled_refined;
  }
  res.certified = false;
  return res;
}

} // namespace dvlab
