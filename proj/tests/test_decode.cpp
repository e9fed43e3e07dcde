#include "support.hpp"

#include "treeclust/decode.hpp"
#include "treeclust/error.hpp"
#include "treeclust/oracle.hpp"
#include "treeclust/pipeline.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace treeclust;

namespace {

struct Solved {
  Dataset data;
  PairTable pt;
  ConstraintSet cs;
  PreparedInstance prep;
  SolveResult result;
  ClusteringSolution sol;
};

Solved solve_tree(Dataset d, int depth, int k, double eps, ConstraintSet cs = {},
                  Objective obj = Objective::MD_MS) {
  Solved s{std::move(d), {}, std::move(cs), {}, {}, {}};
  s.pt = pair_table(s.data);
  ProblemConfig cfg;
  cfg.depth = depth;
  cfg.k = k;
  cfg.epsilon = eps;
  cfg.objective = obj;
  s.prep = prepare_instance(s.data, s.pt, s.cs, cfg);
  REQUIRE(s.prep.encoding);
  s.result = solve_builtin(s.prep.encoding->formula);
  REQUIRE(s.result.status == SolveStatus::OPTIMAL);
  s.sol = decode(*s.result.model, s.prep.encoding->layout, s.data, s.pt);
  return s;
}

}  // namespace

TEST_CASE("two points split at the midpoint") {
  const auto s = solve_tree(testsupport::points_1d({10, 20}), 1, 2, 0.0);
  REQUIRE(s.sol.tree);
  CHECK(s.sol.tree->feature[1] == 0);
  CHECK(s.sol.tree->threshold[1] == 15.0);
  CHECK(s.sol.labels == std::vector<int>{1, 2});
  CHECK(s.sol.tree->leaf_label == std::vector<int>{1, 2});
  CHECK(s.sol.md == 0.0);
  CHECK(s.sol.ms == 10.0);
  CHECK(verify(s.sol, s.data, s.cs, s.prep.classes).ok());
}

TEST_CASE("unary labels decode to counts") {
  // Three clusters along a line: labels follow first occurrence.
  const auto s = solve_tree(testsupport::points_1d({0, 1, 20, 21, 40, 41}), 2, 3, 0.0);
  CHECK(s.sol.labels == std::vector<int>{1, 1, 2, 2, 3, 3});
  const auto& layout = s.prep.encoding->layout;
  const auto& m = *s.result.model;
  CHECK(m[static_cast<std::size_t>(layout.x(2, 1) - 1)]);
  CHECK_FALSE(m[static_cast<std::size_t>(layout.x(2, 2) - 1)]);
  CHECK(lambda_prefix_holds(m, layout));
  CHECK(s.sol.md == 1.0);
  CHECK(s.sol.ms == 19.0);
  const auto report = verify(s.sol, s.data, s.cs, s.prep.classes);
  CHECK_MESSAGE(report.ok(), report.summary());
}

TEST_CASE("tampered solutions fail verification") {
  const auto s = solve_tree(testsupport::points_1d({0, 1, 20, 21, 40, 41}), 2, 3, 0.0,
                            make_constraints(6, {{0, 1}}, {{3, 4}}));
  REQUIRE(verify(s.sol, s.data, s.cs, s.prep.classes).ok());

  SUBCASE("cannot-link joined") {
    auto bad = s.sol;
    bad.labels[4] = bad.labels[3];
    const auto r = verify(bad, s.data, s.cs, s.prep.classes);
    CHECK_FALSE(r.find("cannot_link")->passed);
    CHECK_FALSE(r.find("tree_replay")->passed);
  }
  SUBCASE("must-link split") {
    auto bad = s.sol;
    bad.labels[1] = 3;
    CHECK_FALSE(verify(bad, s.data, s.cs, s.prep.classes).find("must_link")->passed);
  }
  SUBCASE("class index too small for the diameter") {
    auto bad = s.sol;
    REQUIRE(bad.lambda_minus > 0);
    bad.lambda_minus -= 1;
    bad.lambda_plus = std::min(bad.lambda_plus, bad.lambda_minus);
    CHECK_FALSE(verify(bad, s.data, s.cs, s.prep.classes).find("md_class_bound")->passed);
  }
  SUBCASE("reported objective differs") {
    auto bad = s.sol;
    bad.md += 0.5;
    CHECK_FALSE(verify(bad, s.data, s.cs, s.prep.classes).find("md_recomputed")->passed);
  }
  SUBCASE("labels not canonical") {
    auto bad = s.sol;
    for (int& l : bad.labels) l = l == 1 ? 2 : (l == 2 ? 1 : l);
    CHECK_FALSE(verify(bad, s.data, s.cs, s.prep.classes).find("canonical_labels")->passed);
  }
}

TEST_CASE("corrupt models are rejected") {
  const auto s = solve_tree(testsupport::points_2d({{0, 0}, {1, 5}, {9, 1}, {10, 6}}), 1, 2, 0.0);
  const auto& layout = s.prep.encoding->layout;
  auto flip = [&](int var, bool value) {
    auto m = *s.result.model;
    m[static_cast<std::size_t>(var - 1)] = value;
    return m;
  };
  auto both = flip(layout.a(1, 0), true);
  both[static_cast<std::size_t>(layout.a(1, 1) - 1)] = true;
  CHECK_THROWS_AS(decode(both, layout, s.data, s.pt), CorruptModelError);
  auto none = flip(layout.a(1, 0), false);
  none[static_cast<std::size_t>(layout.a(1, 1) - 1)] = false;
  CHECK_THROWS_AS(decode(none, layout, s.data, s.pt), CorruptModelError);
  const int leaf = s.sol.leaf_of_point[0];
  CHECK_THROWS_AS(decode(flip(layout.z(0, 1 - leaf), true), layout, s.data, s.pt), CorruptModelError);
  CHECK_THROWS_AS(decode(flip(layout.z(0, leaf), false), layout, s.data, s.pt), CorruptModelError);
  // Send the leftmost point right while its neighbour stays left.
  const int t = 1;
  const int f = s.sol.tree->feature[t];
  std::size_t lo = 0;
  for (std::size_t i = 1; i < 4; ++i)
    if (s.data.points(static_cast<Eigen::Index>(i), f) < s.data.points(static_cast<Eigen::Index>(lo), f)) lo = i;
  CHECK_THROWS_AS(decode(flip(layout.s(lo, t), false), layout, s.data, s.pt), CorruptModelError);
  CHECK_THROWS_AS(decode(std::vector<bool>(3), layout, s.data, s.pt), CorruptModelError);
}

TEST_CASE("lambda prefix detector") {
  const auto layout = VariableLayout::cc(3, 2, 3, Objective::MD_MS);
  std::vector<bool> m(static_cast<std::size_t>(layout.n_vars()));
  auto set = [&](int v) { m[static_cast<std::size_t>(v - 1)] = true; };
  set(layout.bminus(0));
  set(layout.bminus(1));
  set(layout.bplus(0));
  CHECK(lambda_prefix_holds(m, layout));
  set(layout.bplus(2));
  CHECK_FALSE(lambda_prefix_holds(m, layout));
  std::vector<bool> gap(static_cast<std::size_t>(layout.n_vars()));
  gap[static_cast<std::size_t>(layout.bminus(1) - 1)] = true;
  CHECK_FALSE(lambda_prefix_holds(gap, layout));
}

TEST_CASE("diameter and split by direct computation") {
  const auto d = testsupport::points_2d({{0, 0}, {3, 4}, {10, 0}, {10, 1}});
  auto ds = diameter_split(d, {1, 1, 2, 2});
  CHECK(ds.md == 5.0);
  CHECK(ds.ms == doctest::Approx(std::sqrt(49.0 + 9.0)));
  ds = diameter_split(d, {1, 2, 3, 4});
  CHECK(ds.md == 0.0);
  ds = diameter_split(d, {1, 1, 1, 1});
  CHECK(std::isinf(ds.ms));
}

TEST_CASE("small instances decode to oracle-optimal trees") {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 25; ++rep) {
    const Dataset d = testsupport::random_dataset(rng, 6, 2, 2, 8);
    const auto s = solve_tree(d, 2, 2, 0.0, {}, Objective::MD);
    const auto o = tree_oracle(s.data, 2, 2, s.cs);
    REQUIRE(o.feasible);
    CHECK(s.sol.md == doctest::Approx(o.min_md));
    const auto r = verify(s.sol, s.data, s.cs, s.prep.classes);
    CHECK_MESSAGE(r.ok(), r.summary());
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(s.sol.tree->predict(s.data.points.row(static_cast<Eigen::Index>(i))) == s.sol.labels[i]);
  }
}

TEST_CASE("tree export") {
  DecisionTree t;
  t.depth = 1;
  t.feature = {0, 1};
  t.threshold = {0, 2.5};
  t.leaf_label = {2, 1};
  CHECK(tree_to_text(t, {"u", "v"}) == "if v <= 2.5:\n  cluster 2\nelse:\n  cluster 1\n");
  const auto j = nlohmann::json::parse(tree_to_json(t, {"u", "v"}));
  CHECK(j["depth"] == 1);
  CHECK(j["nodes"].size() == 3);
  RowVector x(2);
  x << 0, 2.5;
  CHECK(t.predict(x) == 2);
  x << 0, 2.6;
  CHECK(t.predict(x) == 1);
}
