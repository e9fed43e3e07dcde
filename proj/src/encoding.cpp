#include "treeclust/encoding.hpp"

#include "treeclust/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <numeric>

namespace treeclust {

std::string to_string(Objective o) { return o == Objective::MD ? "MD" : "MD_MS"; }
std::string to_string(ClusteringMode m) { return m == ClusteringMode::Tree ? "tree" : "cc"; }

Objective parse_objective(const std::string& s) {
  if (s == "MD" || s == "md") return Objective::MD;
  if (s == "MD_MS" || s == "md_ms" || s == "MD,MS" || s == "[MD,MS]" || s == "pareto") return Objective::MD_MS;
  throw ConfigError("unknown objective '" + s + "' (expected MD or MD_MS)");
}

ClusteringMode parse_mode(const std::string& s) {
  if (s == "tree") return ClusteringMode::Tree;
  if (s == "cc") return ClusteringMode::CC;
  throw ConfigError("unknown mode '" + s + "' (expected tree or cc)");
}

void ClauseList::add(std::span<const int> lits) {
  lits_.insert(lits_.end(), lits.begin(), lits.end());
  offsets_.push_back(lits_.size());
}

const char* family_name(ClauseFamily f) {
  static constexpr std::array<const char*, static_cast<std::size_t>(ClauseFamily::kCount)> names = {
      "feature_at_most_one", "feature_at_least_one", "order_monotone", "order_ties",      "leaf_path_left",
      "leaf_path_right",     "leaf_path_complete",   "threshold_first", "threshold_last", "leaf_unary",
      "leaf_label_up",       "leaf_label_down",      "point_unary",     "symmetry_first", "symmetry_chain",
      "non_empty",           "cannot_link_first",    "cannot_link_last", "cannot_link_middle",
      "must_link_forward",   "must_link_backward",   "separate_first",  "separate_last",  "separate_middle",
      "together_forward",    "together_backward",    "minus_prefix",    "plus_prefix",    "plus_implies_minus",
      "fixed_unit",          "external"};
  return names.at(static_cast<std::size_t>(f));
}

std::uint64_t WcnfFormula::total_soft_weight() const {
  return std::accumulate(soft_weight.begin(), soft_weight.end(), std::uint64_t{0});
}

std::size_t WcnfFormula::count(ClauseFamily f) const {
  return static_cast<std::size_t>(std::count(hard_family.begin(), hard_family.end(), f));
}

TreeShape::TreeShape(int depth) : depth_(depth) {
  if (depth < 1 || depth > 20) throw ConfigError("tree depth must be in [1, 20]");
  left_.resize(static_cast<std::size_t>(num_leaves()));
  right_.resize(static_cast<std::size_t>(num_leaves()));
  for (int l = 0; l < num_leaves(); ++l) {
    // Walk up from the leaf; a node reached from its left child (even id) is a left ancestor.
    std::vector<int> left, right;
    for (int v = leaf_node(l); v > 1; v /= 2) (v % 2 == 0 ? left : right).push_back(v / 2);
    std::reverse(left.begin(), left.end());
    std::reverse(right.begin(), right.end());
    left_[static_cast<std::size_t>(l)] = std::move(left);
    right_[static_cast<std::size_t>(l)] = std::move(right);
  }
}

VariableLayout VariableLayout::tree(std::size_t n, std::size_t f, int depth, int k, std::size_t mu, Objective obj) {
  VariableLayout v;
  v.n_ = n;
  v.f_ = f;
  v.mu_ = mu;
  v.depth_ = depth;
  v.k_ = k;
  v.n_branch_ = (1 << depth) - 1;
  v.n_leaves_ = 1 << depth;
  v.has_bplus_ = obj == Objective::MD_MS;
  int next = 0;
  v.a_base_ = next;
  next += v.n_branch_ * static_cast<int>(f);
  v.s_base_ = next;
  next += static_cast<int>(n) * v.n_branch_;
  v.z_base_ = next;
  next += static_cast<int>(n) * v.n_leaves_;
  v.g_base_ = next;
  next += v.n_leaves_ * (k - 1);
  v.x_base_ = next;
  next += static_cast<int>(n) * (k - 1);
  v.bm_base_ = next;
  next += static_cast<int>(mu);
  v.bp_base_ = next;
  if (v.has_bplus_) next += static_cast<int>(mu);
  v.n_vars_ = next;
  return v;
}

VariableLayout VariableLayout::cc(std::size_t n, int k, std::size_t mu, Objective obj) {
  VariableLayout v;
  v.n_ = n;
  v.mu_ = mu;
  v.k_ = k;
  v.has_bplus_ = obj == Objective::MD_MS;
  int next = 0;
  v.x_base_ = next;
  next += static_cast<int>(n) * (k - 1);
  v.bm_base_ = next;
  next += static_cast<int>(mu);
  v.bp_base_ = next;
  if (v.has_bplus_) next += static_cast<int>(mu);
  v.n_vars_ = next;
  return v;
}

std::string VariableLayout::symbol(int var) const {
  if (var < 1 || var > n_vars_) return "?" + std::to_string(var);
  const int id = var - 1;
  auto two = [](const char* name, int p, int q) {
    return std::string(name) + "[" + std::to_string(p) + "," + std::to_string(q) + "]";
  };
  const int f = static_cast<int>(f_);
  if (has_tree()) {
    if (id < s_base_) return two("a", (id - a_base_) / f + 1, (id - a_base_) % f);
    if (id < z_base_) return two("s", (id - s_base_) / n_branch_, (id - s_base_) % n_branch_ + 1);
    if (id < g_base_) return two("z", (id - z_base_) / n_leaves_, (id - z_base_) % n_leaves_);
    if (id < x_base_) return two("g", (id - g_base_) / (k_ - 1), (id - g_base_) % (k_ - 1) + 1);
  }
  if (id < bm_base_) return two("x", (id - x_base_) / (k_ - 1), (id - x_base_) % (k_ - 1) + 1);
  if (id < bp_base_) return "bminus[" + std::to_string(id - bm_base_ + 1) + "]";
  return "bplus[" + std::to_string(id - bp_base_ + 1) + "]";
}

std::string VariableLayout::to_json() const {
  using json = nlohmann::ordered_json;
  json j = json::object();
  if (has_tree()) {
    json a = json::array(), s = json::array(), z = json::array(), g = json::array();
    for (int t = 1; t <= n_branch_; ++t)
      for (std::size_t f = 0; f < f_; ++f) a.push_back({t, f, this->a(t, f)});
    for (std::size_t i = 0; i < n_; ++i)
      for (int t = 1; t <= n_branch_; ++t) s.push_back({i, t, this->s(i, t)});
    for (std::size_t i = 0; i < n_; ++i)
      for (int l = 0; l < n_leaves_; ++l) z.push_back({i, l, this->z(i, l)});
    for (int l = 0; l < n_leaves_; ++l)
      for (int c = 1; c < k_; ++c) g.push_back({l, c, this->g(l, c)});
    j["a"] = std::move(a);
    j["s"] = std::move(s);
    j["z"] = std::move(z);
    j["g"] = std::move(g);
  }
  json x = json::array(), bm = json::array();
  for (std::size_t i = 0; i < n_; ++i)
    for (int c = 1; c < k_; ++c) x.push_back({i, c, this->x(i, c)});
  for (std::size_t w = 0; w < mu_; ++w) bm.push_back({w + 1, bminus(w)});
  j["x"] = std::move(x);
  j["bminus"] = std::move(bm);
  if (has_bplus_) {
    json bp = json::array();
    for (std::size_t w = 0; w < mu_; ++w) bp.push_back({w + 1, bplus(w)});
    j["bplus"] = std::move(bp);
  }
  return j.dump();
}

FeatureOrders feature_orders(const Dataset& d) {
  FeatureOrders fo;
  const std::size_t n = d.size();
  fo.order.resize(d.num_features());
  for (std::size_t j = 0; j < d.num_features(); ++j) {
    auto& ord = fo.order[j];
    ord.resize(n);
    std::iota(ord.begin(), ord.end(), 0u);
    const auto col = d.points.col(static_cast<Eigen::Index>(j));
    std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t p, std::uint32_t q) { return col(p) < col(q); });
  }
  return fo;
}

namespace {

void check_common(const Dataset& d, int k, const DistanceClassing& dc, const PruningOutcome& po, const EncodeOptions& opts) {
  if (k < 2) throw ConfigError("k must be at least 2");
  if (d.size() < static_cast<std::size_t>(k)) throw ConfigError("need at least k points");
  if (dc.size() == 0) throw ConfigError("empty distance classing");
  if (po.infeasible) throw ConfigError("constraints are inconsistent; nothing to encode");
  if (opts.min_nonempty && (*opts.min_nonempty < 1 || *opts.min_nonempty > k))
    throw ConfigError("min_nonempty must lie in [1, k]");
}

// Everything after the tree: symmetry breaking, non-emptiness, pair clauses,
// class prefix structure, pruning units and the soft objective.
void emit_clustering_clauses(WcnfFormula& f, const VariableLayout& v, std::size_t n, int k, const PairTable& pt,
                             const DistanceClassing& dc, const PruningOutcome& po, const EncodeOptions& opts) {
  using F = ClauseFamily;
  const bool pareto = opts.objective == Objective::MD_MS;
  std::vector<int> buf;

  // Point c (1-based) may use clusters 1..c only.
  for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kSymmetryFirst, {-v.x(static_cast<std::size_t>(c - 1), c)});

  // Label > c at point i (1-based) needs an earlier point with label > c-1.
  for (std::size_t i1 = 1; i1 <= n; ++i1) {
    for (int c = 2; c <= k - 1 && static_cast<std::size_t>(c) < i1; ++c) {
      buf.clear();
      buf.push_back(-v.x(i1 - 1, c));
      for (std::size_t p = 0; p + 1 < i1; ++p) buf.push_back(v.x(p, c - 1));
      f.add_hard(F::kSymmetryChain, buf);
    }
  }

  const int kmin = opts.min_nonempty.value_or(k);
  if (kmin >= 2) {
    buf.clear();
    for (std::size_t i = 0; i < n; ++i) buf.push_back(v.x(i, kmin - 1));
    f.add_hard(F::kNonEmpty, buf);
  }

  for (const auto& p : po.emit_cl) {
    const std::size_t i = p.first, j = p.second;
    f.add_hard(F::kCannotLinkFirst, {v.x(i, 1), v.x(j, 1)});
    f.add_hard(F::kCannotLinkLast, {-v.x(i, k - 1), -v.x(j, k - 1)});
    for (int c = 1; c <= k - 2; ++c)
      f.add_hard(F::kCannotLinkMiddle, {-v.x(i, c), -v.x(j, c), v.x(i, c + 1), v.x(j, c + 1)});
  }
  for (const auto& p : po.emit_ml) {
    const std::size_t i = p.first, j = p.second;
    for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kMustLinkForward, {-v.x(i, c), v.x(j, c)});
    for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kMustLinkBackward, {v.x(i, c), -v.x(j, c)});
  }

  for (const auto& cp : po.emit_cond_minus) {
    const std::size_t i = pt[cp.pair].i, j = pt[cp.pair].j;
    const int b = v.bminus(cp.cls);
    f.add_hard(F::kSeparateFirst, {b, v.x(i, 1), v.x(j, 1)});
    f.add_hard(F::kSeparateLast, {b, -v.x(i, k - 1), -v.x(j, k - 1)});
    for (int c = 1; c <= k - 2; ++c)
      f.add_hard(F::kSeparateMiddle, {b, -v.x(i, c), -v.x(j, c), v.x(i, c + 1), v.x(j, c + 1)});
  }
  if (pareto) {
    for (const auto& cp : po.emit_cond_plus) {
      const std::size_t i = pt[cp.pair].i, j = pt[cp.pair].j;
      const int b = v.bplus(cp.cls);
      for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kTogetherForward, {-b, -v.x(i, c), v.x(j, c)});
      for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kTogetherBackward, {-b, v.x(i, c), -v.x(j, c)});
    }
  }

  const std::size_t mu = dc.size();
  for (std::size_t w = 1; w < mu; ++w) f.add_hard(F::kMinusPrefix, {-v.bminus(w), v.bminus(w - 1)});
  if (pareto) {
    for (std::size_t w = 1; w < mu; ++w) f.add_hard(F::kPlusPrefix, {-v.bplus(w), v.bplus(w - 1)});
    for (std::size_t w = 0; w < mu; ++w) f.add_hard(F::kPlusImpliesMinus, {-v.bplus(w), v.bminus(w)});
  }

  if (pareto && po.fix_plus_false) f.add_hard(F::kFixedUnit, {-v.bplus(*po.fix_plus_false)});
  if (po.fix_minus_true) f.add_hard(F::kFixedUnit, {v.bminus(*po.fix_minus_true)});

  for (std::size_t w = 0; w < mu; ++w) f.add_soft({-v.bminus(w)});
  if (pareto)
    for (std::size_t w = 0; w < mu; ++w) f.add_soft({v.bplus(w)});
}

}  // namespace

Encoding encode_tree(const Dataset& d, const TreeShape& shape, int k, const PairTable& pt, const DistanceClassing& dc,
                     const PruningOutcome& po, const EncodeOptions& opts) {
  check_common(d, k, dc, po, opts);
  if (shape.num_leaves() < k) throw ConfigError("tree of depth " + std::to_string(shape.depth()) + " has fewer than k leaves");

  using F = ClauseFamily;
  const std::size_t n = d.size();
  const std::size_t nf = d.num_features();
  Encoding enc{WcnfFormula{}, VariableLayout::tree(n, nf, shape.depth(), k, dc.size(), opts.objective)};
  auto& f = enc.formula;
  const auto& v = enc.layout;
  f.n_vars = v.n_vars();

  const FeatureOrders fo = feature_orders(d);
  const int nb = shape.num_branch();
  const int nl = shape.num_leaves();
  std::vector<int> buf;

  for (int t = 1; t <= nb; ++t)
    for (std::size_t j = 0; j < nf; ++j)
      for (std::size_t j2 = j + 1; j2 < nf; ++j2) f.add_hard(F::kFeatureAtMostOne, {-v.a(t, j), -v.a(t, j2)});

  for (int t = 1; t <= nb; ++t) {
    buf.clear();
    for (std::size_t j = 0; j < nf; ++j) buf.push_back(v.a(t, j));
    f.add_hard(F::kFeatureAtLeastOne, buf);
  }

  for (int t = 1; t <= nb; ++t)
    for (std::size_t j = 0; j < nf; ++j) {
      const auto& ord = fo.order[j];
      for (std::size_t q = 0; q + 1 < n; ++q) f.add_hard(F::kOrderMonotone, {-v.a(t, j), v.s(ord[q], t), -v.s(ord[q + 1], t)});
    }

  for (int t = 1; t <= nb; ++t)
    for (std::size_t j = 0; j < nf; ++j) {
      const auto& ord = fo.order[j];
      const auto col = d.points.col(static_cast<Eigen::Index>(j));
      for (std::size_t q = 0; q + 1 < n; ++q)
        if (col(ord[q]) == col(ord[q + 1])) f.add_hard(F::kOrderTies, {-v.a(t, j), -v.s(ord[q], t), v.s(ord[q + 1], t)});
    }

  for (int l = 0; l < nl; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (int anc : shape.left_ancestors(l)) f.add_hard(F::kLeafPathLeft, {-v.z(i, l), v.s(i, anc)});

  for (int l = 0; l < nl; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (int anc : shape.right_ancestors(l)) f.add_hard(F::kLeafPathRight, {-v.z(i, l), -v.s(i, anc)});

  for (int l = 0; l < nl; ++l)
    for (std::size_t i = 0; i < n; ++i) {
      buf.clear();
      buf.push_back(v.z(i, l));
      for (int anc : shape.left_ancestors(l)) buf.push_back(-v.s(i, anc));
      for (int anc : shape.right_ancestors(l)) buf.push_back(v.s(i, anc));
      f.add_hard(F::kLeafPathComplete, buf);
    }

  for (int t = 1; t <= nb; ++t)
    for (std::size_t j = 0; j < nf; ++j) f.add_hard(F::kThresholdFirst, {-v.a(t, j), v.s(fo.first(j), t)});
  for (int t = 1; t <= nb; ++t)
    for (std::size_t j = 0; j < nf; ++j) f.add_hard(F::kThresholdLast, {-v.a(t, j), -v.s(fo.last(j), t)});

  for (int l = 0; l < nl; ++l)
    for (int c = 1; c <= k - 2; ++c) f.add_hard(F::kLeafUnary, {v.g(l, c), -v.g(l, c + 1)});

  for (int l = 0; l < nl; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kLeafLabelUp, {-v.z(i, l), -v.g(l, c), v.x(i, c)});
  for (int l = 0; l < nl; ++l)
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 1; c <= k - 1; ++c) f.add_hard(F::kLeafLabelDown, {-v.z(i, l), v.g(l, c), -v.x(i, c)});

  emit_clustering_clauses(f, v, n, k, pt, dc, po, opts);
  return enc;
}

Encoding encode_cc(const Dataset& d, int k, const PairTable& pt, const DistanceClassing& dc, const PruningOutcome& po,
                   const EncodeOptions& opts) {
  check_common(d, k, dc, po, opts);
  const std::size_t n = d.size();
  Encoding enc{WcnfFormula{}, VariableLayout::cc(n, k, dc.size(), opts.objective)};
  auto& f = enc.formula;
  const auto& v = enc.layout;
  f.n_vars = v.n_vars();

  for (std::size_t i = 0; i < n; ++i)
    for (int c = 1; c <= k - 2; ++c) f.add_hard(ClauseFamily::kPointUnary, {v.x(i, c), -v.x(i, c + 1)});

  emit_clustering_clauses(f, v, n, k, pt, dc, po, opts);
  return enc;
}

}  // namespace treeclust
