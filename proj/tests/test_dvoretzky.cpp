#include <doctest.h>

#include <cmath>

#include "dvlab/dvoretzky.hpp"
#include "dvlab/errors.hpp"
#include "dvlab/estimators.hpp"

using namespace dvlab;

TEST_CASE("threshold rules") {
  CHECK(threshold_value(MilmanSchechtmanThreshold{}, 100, 100) == 0.5);
  CHECK(threshold_value(ConstantThreshold{0.5}, 10, 3) == 0.5);
  CHECK(threshold_value(ConstantThreshold{0.5}, 1000, 999) == 0.5);
  CHECK(threshold_value(DvoretzkyProbThreshold{1.0}, 10, 3) == doctest::Approx(1 - std::exp(-3.0)).epsilon(1e-15));
  CHECK(threshold_value(DvoretzkyProbThreshold{1.0}, 10, 3) == doctest::Approx(0.9502).epsilon(1e-4));

  for (const char *text : {"const:0.5", "ms", "dvoretzky:0.25", "const:0.29999999999999999"}) {
    CHECK(threshold_to_text(parse_threshold(text)) == threshold_to_text(parse_threshold(threshold_to_text(parse_threshold(text)))));
  }
  CHECK(std::get<ConstantThreshold>(parse_threshold("const:0.7")).c == 0.7);
  CHECK(std::get<DvoretzkyProbThreshold>(parse_threshold("dvoretzky:2")).c_tilde == 2.0);
  for (const char *bad : {"const:1", "const:0", "const:x", "dvoretzky:-1", "half", ""}) {
    CHECK_THROWS_AS(parse_threshold(bad), UsageError);
  }
  CHECK_THROWS_AS(threshold_value(ConstantThreshold{0.5}, 10, 0), UsageError);
}

TEST_CASE("is_spherical") {
  RngStream rng(1, 0);
  const ExtremaConfig cfg;
  SUBCASE("Euclidean") {
    for (double eps : {0.01, 0.3, 0.99}) {
      CHECK(is_spherical(Euclidean{8}, haar_basis(8, 3, rng), eps, 1.0, cfg, rng));
    }
    CHECK_FALSE(is_spherical(Euclidean{8}, haar_basis(8, 3, rng), 0.3, 2.0, cfg, rng));
  }
  SUBCASE("polar hull section with |P_V e1| = 1/2") {
    const PolarHull hull{100, 10.0};
    const double M = estimate_M(hull, 20000, 0.99, rng).mean;
    // Closed-form extrema on this section are (1, 5).
    CHECK(M < 5.0 / 1.2);
    std::vector<double> cols(200, 0.0);
    cols[0] = 0.5;
    cols[1] = std::sqrt(0.75);
    cols[100 + 2] = 1.0;
    const auto v = SubspaceBasis::from_columns(100, 2, cols);
    CHECK(*exact_sup(hull, v) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_FALSE(is_spherical(hull, v, 0.2, M, cfg, rng));
    ExtremaConfig sampled = cfg;
    sampled.use_exact = false;
    CHECK_FALSE(is_spherical(hull, v, 0.2, M, sampled, rng));
  }
  CHECK_THROWS_AS(is_spherical(Euclidean{3}, haar_basis(3, 1, rng), 1.5, 1.0, cfg, rng), UsageError);
  CHECK_THROWS_AS(is_spherical(Euclidean{3}, haar_basis(3, 1, rng), 0.5, 0.0, cfg, rng), UsageError);
}

TEST_CASE("section_probability") {
  const RngStream rng(2, 0);
  const ExtremaConfig cfg;
  SUBCASE("Euclidean with the right M") {
    const auto p = section_probability(Euclidean{10}, 4, 0.1, 1.0, 100, cfg, rng);
    CHECK(p.mean == 1.0);
  }
  SUBCASE("single directions with wide bounds") {
    const BodySpec cube = LpBall::infinity(16);
    const double M = estimate_M(cube, 100000, 0.99, rng.fork(1)).mean;
    CHECK(section_probability(cube, 1, 0.9, M, 400, cfg, rng).mean > 0.9);
  }
  SUBCASE("full space cannot be spherical for the cube") {
    const BodySpec cube = LpBall::infinity(64);
    const auto M = estimate_M(cube, 100000, 0.99, rng.fork(1));
    CHECK(1.0 / M.hi > 1.2);
    CHECK(section_probability(cube, 64, 0.2, M.mean, 50, cfg, rng).mean == 0.0);
  }
  SUBCASE("scaling the body and M together changes nothing") {
    const SymPolytope cube = SymPolytope::cube(20);
    const double M = 0.4;
    for (std::size_t k : {1u, 2u, 3u}) {
      const auto a = section_probability(cube, k, 0.5, M, 60, cfg, rng);
      const auto b = section_probability(cube.scaled(2.0), k, 0.5, M * 2.0, 60, cfg, rng);
      CHECK(a.mean == b.mean);
    }
  }
  SUBCASE("monotone in epsilon on common sections") {
    const BodySpec cube = LpBall::infinity(20);
    double prev = 0.0;
    for (double eps : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double p = section_probability(cube, 2, eps, 0.4, 100, cfg, rng).mean;
      CHECK(p >= prev);
      prev = p;
    }
  }
  CHECK_THROWS_AS(section_probability(Euclidean{5}, 6, 0.5, 1.0, 100, cfg, rng), UsageError);
  CHECK_THROWS_AS(section_probability(Euclidean{5}, 2, 0.5, 1.0, 10, cfg, rng), UsageError);
}

TEST_CASE("dvoretzky_dimension") {
  const ExtremaConfig cfg;
  SUBCASE("Euclidean") {
    const auto r = dvoretzky_dimension(Euclidean{20}, 0.3, ConstantThreshold{0.5}, SearchBudget{}, cfg, RngStream(3, 0));
    CHECK(r.k_hat == 20);
    CHECK(r.ratio == 1.0);
    CHECK(r.theory == 20.0);
    CHECK_FALSE(r.non_monotone_flag);
    CHECK_FALSE(r.degraded_confidence);
    CHECK(r.k_hat_lo == 20);
    CHECK(r.k_hat_hi == 20);
  }
  SUBCASE("cube at n=16 against an exhaustive probe") {
    const BodySpec cube = LpBall::infinity(16);
    const double eps = 0.5;
    const double M = estimate_M(cube, 100000, 0.99, RngStream(99, 0)).mean;
    std::size_t crossover = 0;
    for (std::size_t k = 1; k <= 16; ++k) {
      const double p = section_probability(cube, k, eps, M, 2000, cfg, RngStream(100 + k, 0)).mean;
      if (p > 0.5) {
        crossover = k;
      }
      if (p < 0.02) {
        break;
      }
    }
    REQUIRE(crossover >= 1);
    SearchBudget budget;
    budget.m_sensitivity = false;
    const auto r = dvoretzky_dimension(cube, eps, ConstantThreshold{0.5}, budget, cfg, RngStream(4, 0));
    CHECK(r.k_hat + 1 >= crossover);
    CHECK(r.k_hat <= crossover + 1);
    CHECK(r.ratio > 0.02);
    CHECK(r.ratio < 50.0);
    CHECK(r.b_used == 1.0);
  }
  SUBCASE("polar hull tracks l") {
    const std::size_t n = 64, l = 4;
    const PolarHull hull{n, std::sqrt(double(n) / double(l))};
    const auto r = dvoretzky_dimension(hull, 0.5, ConstantThreshold{0.5}, SearchBudget{}, cfg, RngStream(5, 0));
    CHECK(r.k_hat * 4 >= l);
    CHECK(r.k_hat <= 4 * l);
    CHECK(r.k_hat_lo <= r.k_hat);
    CHECK(r.k_hat_hi >= r.k_hat);
  }
  SUBCASE("deterministic") {
    SearchBudget budget;
    budget.sections_per_k = 60;
    budget.M_samples = 5000;
    const auto a = dvoretzky_dimension(LpBall::infinity(12), 0.5, MilmanSchechtmanThreshold{}, budget, cfg, RngStream(6, 0));
    const auto b = dvoretzky_dimension(LpBall::infinity(12), 0.5, MilmanSchechtmanThreshold{}, budget, cfg, RngStream(6, 0));
    CHECK(a.k_hat == b.k_hat);
    CHECK(a.M_used.mean == b.M_used.mean);
    REQUIRE(a.probes.size() == b.probes.size());
    for (std::size_t i = 0; i < a.probes.size(); ++i) {
      CHECK(a.probes[i].p_hat.mean == b.probes[i].p_hat.mean);
    }
  }
  CHECK_THROWS_AS(dvoretzky_dimension(SymPolytope::slab(4, 1.0), 0.5, ConstantThreshold{0.5}, SearchBudget{}, cfg,
                                      RngStream(7, 0)),
                  UnsupportedBody);
}

TEST_CASE("lemma1_check") {
  const RngStream rng(8, 0);
  const auto small = lemma1_check(100, 4, 0.5, 20000, 8.0, rng);
  CHECK(small.premise_holds);
  CHECK(small.conclusion_holds);
  CHECK_FALSE(small.violated);

  const auto large = lemma1_check(100, 81, 0.5, 20000, 8.0, rng);
  CHECK_FALSE(large.premise_holds);
  CHECK_FALSE(large.violated);

  // Premise holds near k = t^2 n, conclusion fails for a small constant.
  const auto tight = lemma1_check(100, 9, 0.4, 20000, 0.5, rng);
  CHECK(tight.premise_holds);
  CHECK_FALSE(tight.conclusion_holds);
  CHECK(tight.violated);

  for (std::size_t k : {1u, 50u, 99u}) {
    const auto r = lemma1_check(100, k, 1.1, 2000, 1.0, rng);
    CHECK(r.premise_holds);
    CHECK_FALSE(r.violated);
  }
}

TEST_CASE("theory_ratio") {
  CHECK(theory_ratio(Euclidean{50}, EstimateCI{1.0, 0.0, 1, 0.99, 1.0, 1.0, 0.0}, 1.0, 50) == 50.0);
  SUBCASE("cube at n=64") {
    const BodySpec cube = LpBall::infinity(64);
    const auto M = estimate_M(cube, 100000, 0.99, RngStream(9, 0));
    const double v = theory_ratio(cube, M, b_exact(cube), 64);
    CHECK(v == doctest::Approx(64.0 * M.mean * M.mean).epsilon(1e-15));
    CHECK(v > 5.0);
    CHECK(v < 13.0);
  }
  SUBCASE("polar hull n=256, R=4") {
    const PolarHull hull{256, 4.0};
    const auto M = estimate_M(hull, 100000, 0.99, RngStream(10, 0));
    const double v = theory_ratio(hull, M, b_exact(hull), 256);
    CHECK(v > 16.0 / 3.0);
    CHECK(v < 48.0);
  }
  CHECK_THROWS_AS(theory_ratio(Euclidean{5}, EstimateCI{1.0}, 1.0, 6), UsageError);
  CHECK_THROWS_AS(theory_ratio(Euclidean{5}, EstimateCI{1.0}, 0.0, 5), UsageError);
}
