#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dvlab/errors.hpp"
#include "dvlab/experiments.hpp"
#include "dvlab/parallel.hpp"

using namespace dvlab;

namespace {

std::vector<std::string> split_lines(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    out.push_back(line);
  }
  return out;
}

SearchParams quick_search(std::uint64_t seed) {
  SearchParams s;
  s.sections = 60;
  s.m_samples = 5000;
  s.max_rounds = 1;
  s.seed = seed;
  return s;
}

struct WorkerGuard {
  ~WorkerGuard() { set_worker_count(0); }
};

} // namespace

TEST_CASE("ResultTable") {
  ResultTable t({"a", "b", "c"});
  t.add_row({std::int64_t{1}, 0.1, std::string("x,y")});
  t.add_row({std::int64_t{-2}, std::nan(""), std::string("plain")});
  CHECK_THROWS_AS(t.add_row({std::int64_t{1}}), UsageError);
  CHECK_THROWS_AS(ResultTable({"a", "a"}), UsageError);
  t.add_summary("s", 2.5);
  CHECK_THROWS_AS(t.add_summary("s", 1.0), UsageError);
  CHECK(t.summary_number("s") == 2.5);
  CHECK(as_number(t.at(1, "a")) == -2.0);
  CHECK_THROWS_AS(t.at(0, "zzz"), UsageError);
  CHECK_THROWS_AS(as_number(t.at(0, "c")), UsageError);

  std::ostringstream csv;
  t.write_csv(csv);
  const auto lines = split_lines(csv.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "a,b,c");
  CHECK(lines[1] == "1,0.10000000000000001,\"x,y\"");
  CHECK(lines[2] == "-2,nan,plain");

  const auto j = t.to_json();
  CHECK(j["columns"].size() == 3);
  CHECK(j["rows"][0][1].get<double>() == 0.1);
  CHECK(j["rows"][1][1].get<std::string>() == "nan");
  CHECK(j["summary"]["s"].get<double>() == 2.5);
  CHECK(j.contains("manifest"));
}

TEST_CASE("CSV and JSON carry the same values") {
  const auto t = cmd_moments({60, 12, 3000, 5});
  std::ostringstream csv;
  t.write_csv(csv);
  const auto lines = split_lines(csv.str());
  const auto j = t.to_json();
  REQUIRE(lines.size() == 1 + j["rows"].size());
  std::istringstream row(lines[1]);
  std::size_t col = 0;
  for (std::string cell; std::getline(row, cell, ',');) {
    const auto &jc = j["rows"][0][col++];
    CHECK(std::stod(cell) == jc.get<double>());
  }
  CHECK(col == t.columns().size());
}

TEST_CASE("cmd_moments") {
  const auto full = cmd_moments({30, 30, 2000, 1});
  CHECK(as_number(full.at(0, "mean_sq")) == 1.0);
  CHECK(as_number(full.at(0, "mean_abs")) == 1.0);
  CHECK(full.summary_number("z_mean_sq") == 0.0);

  const auto a = cmd_moments({100, 25, 100000, 1});
  const auto b = cmd_moments({100, 25, 100000, 2});
  CHECK(std::abs(a.summary_number("z_mean_sq")) < 4.0);
  const double z99 = 2.5758293035489;
  const double sa = as_number(a.at(0, "mean_sq_hw")) / z99;
  const double sb = as_number(b.at(0, "mean_sq_hw")) / z99;
  CHECK(std::abs(as_number(a.at(0, "mean_sq")) - as_number(b.at(0, "mean_sq"))) < 6 * std::hypot(sa, sb));
  CHECK(a.manifest.experiment == "moments");
  CHECK(a.manifest.master_seed == 1);
  CHECK_THROWS_AS(cmd_moments({10, 11, 100, 1}), UsageError);
}

TEST_CASE("cmd_tails") {
  SUBCASE("synthetic injection") {
    TailsParams p;
    p.synthetic_c0 = 1.7;
    const auto t = cmd_tails(p);
    CHECK(std::abs(t.summary_number("c0_hat") - 1.7) < 1e-9);
    CHECK(t.summary_number("r_squared") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t.summary_number("synthetic") == 1.0);
    CHECK_FALSE(t.numerical_failure());
  }
  SUBCASE("insufficient data leaves a partial table with a warning") {
    TailsParams p;
    p.samples = 50;
    p.t_grid = {0.5, 0.6, 0.7, 0.8};
    const auto t = cmd_tails(p);
    CHECK(t.numerical_failure());
    CHECK(t.warnings().size() == 1);
    CHECK(t.rows().size() == 4);
    CHECK(std::isnan(t.summary_number("c0_hat")));
  }
  CHECK(default_tail_grid(100).front() == doctest::Approx(0.05));
  CHECK(default_tail_grid(100).back() == doctest::Approx(0.25));
}

TEST_CASE("cmd_equidist") {
  EquidistParams p;
  p.n = 8;
  p.k = 8;
  p.samples = 200;
  p.n_seeds = 5;
  const auto t = cmd_equidist(p);
  for (std::size_t r = 0; r < 5; ++r) {
    CHECK(as_number(t.at(r, "statistic")) == 0.0);
  }
  CHECK(t.summary_number("rejections") == 0.0);
  p.mismatch = true;
  CHECK_THROWS_AS(cmd_equidist(p), UsageError);
}

TEST_CASE("cmd_kdim and cmd_scaling on Euclidean bodies") {
  KdimParams kp;
  kp.body = "euclidean:n=20";
  kp.search = quick_search(3);
  kp.search.eps = 0.3;
  const auto t = cmd_kdim(kp);
  CHECK(t.summary_number("k_hat") == 20.0);
  CHECK(t.summary_number("ratio") == 1.0);
  CHECK(t.manifest.body == "euclidean:n=20");

  ScalingParams sp;
  sp.bodies = {"euclidean:n=16", "euclidean:n=32", "euclidean:n=64"};
  sp.search = quick_search(4);
  const auto s = cmd_scaling(sp);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(as_number(s.at(r, "ratio")) == 1.0);
  }
  CHECK(s.summary_number("ratio_spread") == 1.0);
  CHECK(s.summary_number("k_hat_growth") == 4.0);
}

TEST_CASE("cmd_lemma1") {
  Lemma1Params p;
  p.n_list = {60};
  p.k_grid = {1, 5, 30, 59, 60};
  p.t_grid = {1.0, 1.5};
  p.c2 = 1.0;
  p.samples = 2000;
  const auto t = cmd_lemma1(p);
  CHECK(t.summary_number("cells") == 10.0);
  CHECK(t.summary_number("violations") == 0.0);
  const auto grid = default_lemma1_k_grid(100);
  CHECK(grid.front() == 1);
  CHECK(grid.back() == 50);
  CHECK(default_lemma1_k_grid(30).back() == 15);
}

TEST_CASE("replay reproduces a run bit for bit") {
  KdimParams kp;
  kp.body = "lp:n=12,p=inf";
  kp.search = quick_search(11);
  const auto original = cmd_kdim(kp);
  const auto manifest = RunManifest::from_json(nlohmann::json::parse(original.manifest.to_json().dump()));
  const auto again = replay(manifest);
  CHECK(again.same_values(original));

  const auto m = cmd_moments({40, 9, 5000, 21});
  CHECK(replay(RunManifest::from_json(m.sidecar_json()["manifest"])).same_values(m));

  RunManifest bad;
  bad.experiment = "nonsense";
  bad.params = nlohmann::json::object();
  CHECK_THROWS_AS(replay(bad), UsageError);
}

TEST_CASE("results do not depend on the worker count") {
  WorkerGuard guard;
  auto run_all = [] {
    std::vector<ResultTable> out;
    out.push_back(cmd_moments({50, 7, 20000, 3}));
    TailsParams tp;
    tp.n = 50;
    tp.k = 7;
    tp.samples = 20000;
    out.push_back(cmd_tails(tp));
    KdimParams kp;
    kp.body = "lp:n=16,p=1";
    kp.search = quick_search(5);
    out.push_back(cmd_kdim(kp));
    return out;
  };
  set_worker_count(1);
  const auto one = run_all();
  set_worker_count(3);
  const auto three = run_all();
  REQUIRE(one.size() == three.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].same_values(three[i]));
  }
}
