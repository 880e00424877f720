// dvlab: experiment runner for random-section geometry of convex bodies.
//
//   dvlab moments  --n 100 --k 25 --samples 100000
//   dvlab tails    --n 100 --k 25 --samples 1000000
//   dvlab equidist --n 50 --k 10 --samples 10000 --seeds 100 [--mismatch]
//   dvlab kdim     --body lp:n=64,p=inf --eps 0.5 --threshold const:0.5
//   dvlab scaling  --body lp:n=64,p=inf --body lp:n=256,p=inf --eps 0.5
//   dvlab remark2  --n 256 --l 4 --l 16 --eps 0.2 --eps 0.5
//   dvlab lemma1   --n 100 --c2 8
//   dvlab replay   results.manifest.json
//
// Common flags: --seed, --threads, --out, --format csv|json.
// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "dvlab/errors.hpp"
#include "dvlab/experiments.hpp"
#include "dvlab/parallel.hpp"

namespace {

using dvlab::ResultTable;

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string out;
  std::string format = "csv";
};

std::filesystem::path sidecar_path(const std::filesystem::path &out) {
  auto p = out;
  p.replace_extension(".manifest.json");
  return p;
}

void emit(const ResultTable &table, const Common &common) {
  if (common.format == "json") {
    const std::string text = table.to_json().dump(2);
    if (common.out.empty()) {
      std::cout << text << '\n';
    } else {
      std::ofstream(common.out) << text << '\n';
    }
  } else if (common.out.empty()) {
    table.write_csv(std::cout);
    std::cerr << table.sidecar_json().dump(2) << '\n';
  } else {
    std::ofstream csv(common.out);
    table.write_csv(csv);
    std::ofstream(sidecar_path(common.out)) << table.sidecar_json().dump(2) << '\n';
  }
  for (const auto &w : table.warnings()) {
    std::cerr << "warning: " << w << '\n';
  }
}

void add_search_flags(CLI::App *cmd, dvlab::SearchParams &s, bool with_eps) {
  if (with_eps) {
    cmd->add_option("--eps", s.eps, "Sphericity tolerance epsilon in (0,1)")->capture_default_str();
  }
  cmd->add_option("--threshold", s.threshold, "const:<c> | ms | dvoretzky:<c_tilde>")->capture_default_str();
  cmd->add_option("--sections", s.sections, "Haar sections per probe")->capture_default_str();
  cmd->add_option("--m-samples", s.m_samples, "Sphere samples for M(K)")->capture_default_str();
  cmd->add_option("--max-rounds", s.max_rounds, "Extra doubling rounds for uncertain probes")->capture_default_str();
  cmd->add_option("--net", s.net, "Random net size for sampled extrema (0 = 2000 k)")->capture_default_str();
  cmd->add_flag("!--no-refine", s.refine, "Disable local refinement of sampled extrema");
  cmd->add_flag("!--no-m-sensitivity", s.m_sensitivity, "Skip boundary re-probes at M -/+ half-width");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Monte Carlo experiments on almost-spherical sections of convex bodies"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--seed", common.seed, "Master seed")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all)")->capture_default_str();
  app.add_option("--out", common.out, "Output path (CSV gets a .manifest.json sidecar)");
  app.add_option("--format", common.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  std::function<ResultTable()> run;

  dvlab::MomentsParams moments;
  auto *c_moments = app.add_subcommand("moments", "Moments of |P_k x| for x uniform on the sphere");
  c_moments->add_option("--n", moments.n)->capture_default_str();
  c_moments->add_option("--k", moments.k)->capture_default_str();
  c_moments->add_option("--samples", moments.samples)->capture_default_str();
  c_moments->callback([&] {
    run = [&] {
      moments.seed = common.seed;
      return dvlab::cmd_moments(moments);
    };
  });

  dvlab::TailsParams tails;
  auto *c_tails = app.add_subcommand("tails", "Deviation tails of |P_k x| and the fitted concentration rate");
  c_tails->add_option("--n", tails.n)->capture_default_str();
  c_tails->add_option("--k", tails.k)->capture_default_str();
  c_tails->add_option("--samples", tails.samples)->capture_default_str();
  c_tails->add_option("--t-grid", tails.t_grid, "Deviation levels (default s/sqrt(n), s = 0.5..2.5)");
  c_tails->add_option("--synthetic-c0", tails.synthetic_c0, "Regression self-test with exact tails 4exp(-c0 t^2 n)");
  c_tails->callback([&] {
    run = [&] {
      tails.seed = common.seed;
      return dvlab::cmd_tails(tails);
    };
  });

  dvlab::EquidistParams equi;
  auto *c_equi = app.add_subcommand("equidist", "KS test of |P_V0 x| against |P_V e_1|");
  c_equi->add_option("--n", equi.n)->capture_default_str();
  c_equi->add_option("--k", equi.k)->capture_default_str();
  c_equi->add_option("--samples", equi.samples, "Samples per side")->capture_default_str();
  c_equi->add_option("--seeds", equi.n_seeds, "Independent replications")->capture_default_str();
  c_equi->add_option("--alpha", equi.alpha)->capture_default_str();
  c_equi->add_flag("--mismatch", equi.mismatch, "Draw the Haar side with k+1 (power check)");
  c_equi->callback([&] {
    run = [&] {
      equi.seed = common.seed;
      return dvlab::cmd_equidist(equi);
    };
  });

  dvlab::KdimParams kdim;
  auto *c_kdim = app.add_subcommand("kdim", "Estimate the Dvoretzky dimension k(K) of one body");
  c_kdim->add_option("--body", kdim.body, "Body text, e.g. lp:n=64,p=inf")->capture_default_str();
  add_search_flags(c_kdim, kdim.search, true);
  c_kdim->callback([&] {
    run = [&] {
      kdim.search.seed = common.seed;
      return dvlab::cmd_kdim(kdim);
    };
  });

  dvlab::ScalingParams scaling;
  auto *c_scaling = app.add_subcommand("scaling", "k(K) against n(M/b)^2 across a family of bodies");
  c_scaling->add_option("--body", scaling.bodies, "Body text (repeatable)")->required();
  add_search_flags(c_scaling, scaling.search, true);
  c_scaling->callback([&] {
    run = [&] {
      scaling.search.seed = common.seed;
      return dvlab::cmd_scaling(scaling);
    };
  });

  dvlab::Remark2Params remark2;
  auto *c_remark2 = app.add_subcommand("remark2", "Polar-hull family with R = sqrt(n/l)");
  c_remark2->add_option("--n", remark2.n)->capture_default_str();
  c_remark2->add_option("--l", remark2.l_list, "Target dimensions l (repeatable)")->capture_default_str();
  c_remark2->add_option("--eps", remark2.eps_list, "Epsilon values (repeatable)")->capture_default_str();
  add_search_flags(c_remark2, remark2.search, false);
  c_remark2->callback([&] {
    run = [&] {
      remark2.search.seed = common.seed;
      return dvlab::cmd_remark2(remark2);
    };
  });

  dvlab::Lemma1Params lemma1;
  auto *c_lemma1 = app.add_subcommand("lemma1", "Sweep the projection-norm implication k < c2 t^2 n");
  c_lemma1->add_option("--n", lemma1.n_list, "Ambient dimensions (repeatable)")->capture_default_str();
  c_lemma1->add_option("--k", lemma1.k_grid, "Subspace dimensions (default grid up to n/2)");
  c_lemma1->add_option("--t", lemma1.t_grid, "Levels t")->capture_default_str();
  c_lemma1->add_option("--c2", lemma1.c2)->capture_default_str();
  c_lemma1->add_option("--samples", lemma1.samples, "Sphere samples per cell")->capture_default_str();
  c_lemma1->callback([&] {
    run = [&] {
      lemma1.seed = common.seed;
      return dvlab::cmd_lemma1(lemma1);
    };
  });

  std::string manifest_path;
  auto *c_replay = app.add_subcommand("replay", "Re-run an experiment from its manifest");
  c_replay->add_option("manifest", manifest_path, "Manifest JSON (sidecar or full JSON output)")->required();
  c_replay->callback([&] {
    run = [&] {
      std::ifstream in(manifest_path);
      if (!in) {
        throw dvlab::UsageError("cannot open '" + manifest_path + "'");
      }
      const auto j = nlohmann::json::parse(in);
      return dvlab::replay(dvlab::RunManifest::from_json(j.at("manifest")));
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    dvlab::set_worker_count(common.threads);
    const ResultTable table = run();
    emit(table, common);
    return table.numerical_failure() ? 2 : 0;
  } catch (const dvlab::UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception &e) {
    std::cerr << "error: bad manifest: " << e.what() << '\n';
    return 1;
  } catch (const dvlab::NumericalError &e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}
