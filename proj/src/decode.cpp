#include "treeclust/decode.hpp"

#include "treeclust/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace treeclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool val(const std::vector<bool>& model, int var) { return model[static_cast<std::size_t>(var - 1)]; }

// Decodes a unary block v(1..k-1) into 1..k, rejecting a 0 followed by a 1.
int unary_label(const std::vector<bool>& model, int k, auto&& var_of, const char* what, std::size_t index) {
  int label = 1;
  bool seen_false = false;
  for (int c = 1; c <= k - 1; ++c) {
    if (val(model, var_of(c))) {
      if (seen_false) throw CorruptModelError(std::string("malformed unary label for ") + what + " " + std::to_string(index));
      ++label;
    } else {
      seen_false = true;
    }
  }
  return label;
}

std::string feature_label(int j, const std::vector<std::string>& names) {
  if (j >= 0 && static_cast<std::size_t>(j) < names.size() && !names[static_cast<std::size_t>(j)].empty())
    return names[static_cast<std::size_t>(j)];
  return "f" + std::to_string(j);
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

}  // namespace

int DecisionTree::leaf_of(const Eigen::Ref<const RowVector>& x) const {
  int t = 1;
  while (t <= num_branch()) {
    const auto ut = static_cast<std::size_t>(t);
    t = x(feature[ut]) <= threshold[ut] ? 2 * t : 2 * t + 1;
  }
  return t - num_leaves();
}

ClusteringSolution decode(const std::vector<bool>& model, const VariableLayout& layout, const Dataset& d,
                          const PairTable& pt, SolveStatus status, std::optional<int> min_nonempty) {
  if (model.size() < static_cast<std::size_t>(layout.n_vars()))
    throw CorruptModelError("model shorter than the variable layout");
  if (d.size() != layout.num_points()) throw CorruptModelError("dataset does not match the layout");

  const std::size_t n = d.size();
  const int k = layout.k();
  ClusteringSolution sol;
  sol.k = k;
  sol.min_nonempty = min_nonempty.value_or(k);
  sol.status = status;

  sol.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    sol.labels[i] = unary_label(model, k, [&](int c) { return layout.x(i, c); }, "point", i);

  if (layout.has_tree()) {
    DecisionTree tree;
    tree.depth = layout.depth();
    const int nb = tree.num_branch();
    tree.feature.assign(static_cast<std::size_t>(nb + 1), -1);
    tree.threshold.assign(static_cast<std::size_t>(nb + 1), 0.0);
    for (int t = 1; t <= nb; ++t) {
      int chosen = -1;
      for (std::size_t j = 0; j < layout.num_features(); ++j) {
        if (!val(model, layout.a(t, j))) continue;
        if (chosen >= 0) throw CorruptModelError("two features chosen at node " + std::to_string(t));
        chosen = static_cast<int>(j);
      }
      if (chosen < 0) throw CorruptModelError("no feature chosen at node " + std::to_string(t));
      double left_max = -kInf, right_min = kInf;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = d.points(static_cast<Eigen::Index>(i), chosen);
        if (val(model, layout.s(i, t)))
          left_max = std::max(left_max, v);
        else
          right_min = std::min(right_min, v);
      }
      if (!(left_max < right_min) || std::isinf(left_max) || std::isinf(right_min))
        throw CorruptModelError("routing at node " + std::to_string(t) + " is not a threshold split");
      tree.feature[static_cast<std::size_t>(t)] = chosen;
      tree.threshold[static_cast<std::size_t>(t)] = left_max + (right_min - left_max) / 2.0;
    }
    tree.leaf_label.resize(static_cast<std::size_t>(tree.num_leaves()));
    for (int l = 0; l < tree.num_leaves(); ++l)
      tree.leaf_label[static_cast<std::size_t>(l)] =
          unary_label(model, k, [&](int c) { return layout.g(l, c); }, "leaf", static_cast<std::size_t>(l));

    sol.leaf_of_point.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      for (int l = 0; l < tree.num_leaves(); ++l) {
        if (!val(model, layout.z(i, l))) continue;
        if (sol.leaf_of_point[i] >= 0) throw CorruptModelError("point " + std::to_string(i) + " reaches two leaves");
        sol.leaf_of_point[i] = l;
      }
      if (sol.leaf_of_point[i] < 0) throw CorruptModelError("point " + std::to_string(i) + " reaches no leaf");
    }
    sol.tree = std::move(tree);
  }

  for (std::size_t w = 0; w < layout.num_classes(); ++w) {
    if (val(model, layout.bminus(w))) ++sol.lambda_minus;
    if (layout.has_bplus() && val(model, layout.bplus(w))) ++sol.lambda_plus;
  }

  sol.md = 0.0;
  sol.ms = kInf;
  for (const auto& p : pt.pairs) {
    if (sol.labels[p.i] == sol.labels[p.j])
      sol.md = std::max(sol.md, p.dist);
    else
      sol.ms = std::min(sol.ms, p.dist);
  }
  return sol;
}

bool lambda_prefix_holds(const std::vector<bool>& model, const VariableLayout& layout) {
  const std::size_t mu = layout.num_classes();
  for (std::size_t w = 1; w < mu; ++w) {
    if (val(model, layout.bminus(w)) && !val(model, layout.bminus(w - 1))) return false;
    if (layout.has_bplus() && val(model, layout.bplus(w)) && !val(model, layout.bplus(w - 1))) return false;
  }
  if (layout.has_bplus())
    for (std::size_t w = 0; w < mu; ++w)
      if (val(model, layout.bplus(w)) && !val(model, layout.bminus(w))) return false;
  return true;
}

DiameterSplit diameter_split(const Dataset& d, const std::vector<int>& labels) {
  DiameterSplit r{0.0, kInf};
  const std::size_t n = d.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = (d.points.row(static_cast<Eigen::Index>(i)) - d.points.row(static_cast<Eigen::Index>(j))).norm();
      if (labels[i] == labels[j])
        r.md = std::max(r.md, dist);
      else
        r.ms = std::min(r.ms, dist);
    }
  }
  return r;
}

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

const VerifyCheck* VerifyReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string VerifyReport::summary() const {
  std::string s;
  for (const auto& c : checks)
    if (!c.passed) s += c.name + ": " + c.detail + "\n";
  return s;
}

VerifyReport verify(const ClusteringSolution& sol, const Dataset& d, const ConstraintSet& cs,
                    const DistanceClassing& dc) {
  VerifyReport rep;
  auto add = [&](std::string name, bool passed, std::string detail = {}) {
    rep.checks.push_back({std::move(name), passed, std::move(detail)});
  };
  const std::size_t n = d.size();

  bool in_range = sol.labels.size() == n;
  for (int l : sol.labels) in_range = in_range && l >= 1 && l <= sol.k;
  add("labels_in_range", in_range, in_range ? "" : "label vector has wrong size or out-of-range entries");
  if (!in_range) return rep;

  std::vector<int> used(static_cast<std::size_t>(sol.k) + 1, 0);
  for (int l : sol.labels) used[static_cast<std::size_t>(l)] = 1;
  const int n_used = static_cast<int>(std::count(used.begin(), used.end(), 1));
  add("clusters_nonempty", n_used >= sol.min_nonempty,
      std::to_string(n_used) + " of " + std::to_string(sol.k) + " clusters used");

  std::size_t ml_bad = 0, cl_bad = 0;
  for (const auto& p : cs.ml) ml_bad += sol.labels[p.first] != sol.labels[p.second];
  for (const auto& p : cs.cl) cl_bad += sol.labels[p.first] == sol.labels[p.second];
  add("must_link", ml_bad == 0, std::to_string(ml_bad) + " must-link pairs split");
  add("cannot_link", cl_bad == 0, std::to_string(cl_bad) + " cannot-link pairs joined");

  const DiameterSplit direct = diameter_split(d, sol.labels);
  auto close = [](double a, double b) { return a == b || std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); };
  add("md_recomputed", close(direct.md, sol.md), "reported " + fmt(sol.md) + ", actual " + fmt(direct.md));
  add("ms_recomputed", close(direct.ms, sol.ms), "reported " + fmt(sol.ms) + ", actual " + fmt(direct.ms));

  const std::size_t mu = dc.size();
  if (sol.lambda_minus > mu || sol.lambda_plus > sol.lambda_minus) {
    add("lambda_range", false,
        "lambda+ " + std::to_string(sol.lambda_plus) + ", lambda- " + std::to_string(sol.lambda_minus));
  } else {
    add("lambda_range", true);
    // Co-clustered pairs only in classes below lambda-.
    bool md_ok = true;
    if (sol.lambda_minus > 0) {
      md_ok = direct.md <= dc.max_dist[sol.lambda_minus - 1];
    } else {
      for (std::size_t i = 0; i < n && md_ok; ++i)
        for (std::size_t j = i + 1; j < n && md_ok; ++j) md_ok = sol.labels[i] != sol.labels[j];
    }
    add("md_class_bound", md_ok,
        "md " + fmt(direct.md) + " vs class bound " +
            (sol.lambda_minus ? fmt(dc.max_dist[sol.lambda_minus - 1]) : std::string("(none)")));
    const bool ms_ok = sol.lambda_plus >= mu || direct.ms >= dc.min_dist[sol.lambda_plus];
    add("ms_class_bound", ms_ok,
        "ms " + fmt(direct.ms) + " vs class bound " + (sol.lambda_plus < mu ? fmt(dc.min_dist[sol.lambda_plus]) : "-"));
  }

  int next = 1;
  bool canonical = true;
  for (int l : sol.labels) {
    if (l > next) {
      canonical = false;
      break;
    }
    if (l == next) ++next;
  }
  add("canonical_labels", canonical, "labels must appear in first-occurrence order");

  if (sol.tree) {
    const DecisionTree& t = *sol.tree;
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = d.points.row(static_cast<Eigen::Index>(i));
      const int leaf = t.leaf_of(row);
      if (t.leaf_label[static_cast<std::size_t>(leaf)] != sol.labels[i]) ++mismatch;
      else if (!sol.leaf_of_point.empty() && sol.leaf_of_point[i] != leaf) ++mismatch;
    }
    add("tree_replay", mismatch == 0, std::to_string(mismatch) + " points disagree with the tree");

    bool nontrivial = true;
    for (int node = 1; node <= t.num_branch(); ++node) {
      const auto col = d.points.col(t.feature[static_cast<std::size_t>(node)]);
      const double a = t.threshold[static_cast<std::size_t>(node)];
      nontrivial = nontrivial && col.minCoeff() <= a && col.maxCoeff() > a;
    }
    add("thresholds_nontrivial", nontrivial, "some threshold puts every value on one side");
  }
  return rep;
}

std::string tree_to_json(const DecisionTree& t, const std::vector<std::string>& feature_names) {
  nlohmann::ordered_json j;
  j["depth"] = t.depth;
  j["thresholds"] = "normalized feature units, per-feature min-max scaled to [0, 100]";
  j["rule"] = "go left iff value <= threshold";
  auto nodes = nlohmann::ordered_json::array();
  for (int node = 1; node <= t.num_branch(); ++node) {
    const auto u = static_cast<std::size_t>(node);
    nlohmann::ordered_json e;
    e["id"] = node;
    e["feature"] = t.feature[u];
    e["feature_name"] = feature_label(t.feature[u], feature_names);
    e["threshold"] = t.threshold[u];
    e["left"] = 2 * node;
    e["right"] = 2 * node + 1;
    nodes.push_back(std::move(e));
  }
  for (int l = 0; l < t.num_leaves(); ++l) {
    nlohmann::ordered_json e;
    e["id"] = t.num_leaves() + l;
    e["leaf"] = true;
    e["label"] = t.leaf_label[static_cast<std::size_t>(l)];
    nodes.push_back(std::move(e));
  }
  j["nodes"] = std::move(nodes);
  return j.dump(2);
}

std::string tree_to_text(const DecisionTree& t, const std::vector<std::string>& feature_names) {
  std::string out;
  auto rec = [&](auto&& self, int node, int indent) -> void {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (node > t.num_branch()) {
      out += pad + "cluster " + std::to_string(t.leaf_label[static_cast<std::size_t>(node - t.num_leaves())]) + "\n";
      return;
    }
    const auto u = static_cast<std::size_t>(node);
    out += pad + "if " + feature_label(t.feature[u], feature_names) + " <= " + fmt(t.threshold[u]) + ":\n";
    self(self, 2 * node, indent + 1);
    out += pad + "else:\n";
    self(self, 2 * node + 1, indent + 1);
  };
  rec(rec, 1, 0);
  return out;
}

}  // namespace treeclust
