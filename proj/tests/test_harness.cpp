#include "support.hpp"

#include "treeclust/error.hpp"
#include "treeclust/harness.hpp"

#include <doctest.h>

#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace treeclust;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  c.dataset = testsupport::data_dir() / "tiny.csv";
  c.depth = 2;
  c.kappa = 0.5;
  c.seeds = RunConfig::default_seeds(3);
  c.time_limit = 60;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("seeds and cell directories") {
  CHECK(RunConfig::default_seeds(3) == std::vector<std::uint64_t>{1, 2, 3});
  RunConfig c = tiny_config();
  CHECK(c.dataset_name() == "tiny");
  CHECK(c.cell_dir(3) == std::filesystem::path("tiny/tree/MD_MS/d2_k3_eps0.1_kappa0.5"));
  c.smart_pairs = false;
  c.epsilon = 0;
  CHECK(c.cell_dir(2).filename() == "d2_k2_eps0_kappa0.5_nosp");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("one cell on a tiny dataset") {
  const auto root = testsupport::scratch_dir("harness-cell");
  const RunConfig cfg = tiny_config();
  const RunRecord r = run_cell(cfg, root);
  CHECK(r.k == 3);
  REQUIRE(r.seeds.size() == 3);
  CHECK(r.feasible() == 3);
  for (const auto& s : r.seeds) {
    CHECK(s.status == SolveStatus::OPTIMAL);
    CHECK(s.num_ml + s.num_cl == 5);
    REQUIRE(s.ari);
    CHECK(*s.ari == doctest::Approx(1.0));
  }
  CHECK(*r.mean_ari() == doctest::Approx(1.0));
  const auto seed_file = root / cfg.cell_dir(3) / "seed2.json";
  REQUIRE(std::filesystem::exists(seed_file));
  const auto j = nlohmann::json::parse(slurp(seed_file));
  CHECK(j["seed"] == 2);
  CHECK(j["status"] == "OPTIMAL");

  // Deterministic apart from timing.
  const RunRecord again = run_cell(cfg);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(again.seeds[q].ari == r.seeds[q].ari);
    CHECK(again.seeds[q].md == r.seeds[q].md);
    CHECK(again.seeds[q].clauses == r.seeds[q].clauses);
  }
}

TEST_CASE("aggregation counts feasible seeds only") {
  RunRecord r;
  SeedRecord a, b, c;
  a.status = SolveStatus::OPTIMAL;
  a.ari = 0.5;
  a.nmi = 0.25;
  a.wall_time = 1;
  b.status = SolveStatus::INFEASIBLE;
  b.wall_time = 3;
  c.status = SolveStatus::SATISFIABLE;
  c.ari = 1.0;
  c.nmi = 0.75;
  c.wall_time = 2;
  r.seeds = {a, b, c};
  CHECK(r.feasible() == 2);
  CHECK(*r.mean_ari() == 0.75);
  CHECK(*r.mean_nmi() == 0.5);
  CHECK(r.mean_time() == 2.0);
  RunRecord none;
  none.seeds = {b};
  CHECK_FALSE(none.mean_ari());
}

TEST_CASE("matrix with a failing cell") {
  const auto out = testsupport::scratch_dir("harness-matrix");
  std::vector<RunConfig> cfgs;
  for (double kappa : {0.0, 0.5}) {
    RunConfig c = tiny_config();
    c.kappa = kappa;
    c.seeds = RunConfig::default_seeds(2);
    cfgs.push_back(c);
  }
  RunConfig broken = tiny_config();
  broken.dataset = testsupport::data_dir() / "does-not-exist.csv";
  cfgs.push_back(broken);

  MatrixOptions opts;
  opts.out_dir = out;
  opts.jobs = 2;
  const auto records = run_matrix(cfgs, opts);
  REQUIRE(records.size() == 3);
  CHECK_FALSE(records[0].error);
  CHECK_FALSE(records[1].error);
  REQUIRE(records[2].error);
  CHECK(records[1].feasible() == 2);

  for (const char* name : {"summary.csv", "summary.json", "table.txt", "figure1.csv"})
    CHECK(std::filesystem::exists(out / name));
  const std::string csv = slurp(out / "summary.csv");
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 4);
  CHECK(csv.find("does-not-exist") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(j.size() == 3);
  const std::string fig = slurp(out / "figure1.csv");
  CHECK(fig.rfind("mode,objective,kappa,mean_ari,feasible_pct,datasets\n", 0) == 0);
  CHECK(fig.find("tree,MD_MS,0.5,") != std::string::npos);
}
