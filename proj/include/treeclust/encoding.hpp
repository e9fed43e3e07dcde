#pragma once

#include "treeclust/data.hpp"
#include "treeclust/pairs.hpp"

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace treeclust {

enum class Objective { MD, MD_MS };
enum class ClusteringMode { Tree, CC };

std::string to_string(Objective o);
std::string to_string(ClusteringMode m);
Objective parse_objective(const std::string& s);
ClusteringMode parse_mode(const std::string& s);

/// Flat storage for DIMACS-style clauses (signed 1-based literals).
class ClauseList {
 public:
  void add(std::span<const int> lits);
  void add(std::initializer_list<int> lits) { add(std::span<const int>(lits.begin(), lits.size())); }

  std::size_t size() const { return offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  std::span<const int> operator[](std::size_t k) const {
    return {lits_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
  }
  std::size_t num_literals() const { return lits_.size(); }

 private:
  std::vector<int> lits_;
  std::vector<std::size_t> offsets_{0};
};

/// What a hard clause encodes; used for per-family census and targeted tests.
enum class ClauseFamily : std::uint8_t {
  kFeatureAtMostOne,     // one feature per branch node
  kFeatureAtLeastOne,
  kOrderMonotone,        // left routing respects the feature order
  kOrderTies,            // equal values route together
  kLeafPathLeft,         // reaching a leaf implies the path's left turns
  kLeafPathRight,        // ... and right turns
  kLeafPathComplete,     // following the whole path reaches the leaf
  kThresholdFirst,       // smallest value goes left
  kThresholdLast,        // largest value goes right
  kLeafUnary,            // leaf labels well-formed unary
  kLeafLabelUp,          // point label >= c if its leaf label >= c
  kLeafLabelDown,
  kPointUnary,           // point labels well-formed unary (no-tree baseline)
  kSymmetryFirst,        // point c can't open cluster beyond c
  kSymmetryChain,        // a new cluster needs its predecessor opened earlier
  kNonEmpty,             // the last cluster is used
  kCannotLinkFirst,
  kCannotLinkLast,
  kCannotLinkMiddle,
  kMustLinkForward,
  kMustLinkBackward,
  kSeparateFirst,        // conditional on b-
  kSeparateLast,
  kSeparateMiddle,
  kTogetherForward,      // conditional on b+
  kTogetherBackward,
  kMinusPrefix,
  kPlusPrefix,
  kPlusImpliesMinus,
  kFixedUnit,            // units proved by pair pruning
  kExternal,             // read back from a file
  kCount
};

const char* family_name(ClauseFamily f);

/// Weighted partial MaxSAT instance.
struct WcnfFormula {
  int n_vars = 0;
  ClauseList hard;
  std::vector<ClauseFamily> hard_family;
  ClauseList soft;
  std::vector<std::uint64_t> soft_weight;

  void add_hard(ClauseFamily f, std::initializer_list<int> lits) {
    hard.add(lits);
    hard_family.push_back(f);
  }
  void add_hard(ClauseFamily f, std::span<const int> lits) {
    hard.add(lits);
    hard_family.push_back(f);
  }
  void add_soft(std::initializer_list<int> lits, std::uint64_t weight = 1) {
    soft.add(lits);
    soft_weight.push_back(weight);
  }
  void add_soft(std::span<const int> lits, std::uint64_t weight = 1) {
    soft.add(lits);
    soft_weight.push_back(weight);
  }

  std::size_t num_clauses() const { return hard.size() + soft.size(); }
  std::uint64_t total_soft_weight() const;
  /// Hard-clause weight in the DIMACS header: total soft weight + 1.
  std::uint64_t top() const { return total_soft_weight() + 1; }
  std::size_t count(ClauseFamily f) const;
};

/// Complete binary tree of fixed depth in heap order: branch nodes are
/// 1 .. 2^d - 1 (children of t are 2t and 2t+1), leaves 2^d .. 2^(d+1) - 1.
/// Leaves are also addressed by ordinal (heap id - 2^d).
class TreeShape {
 public:
  explicit TreeShape(int depth);

  int depth() const { return depth_; }
  int num_branch() const { return (1 << depth_) - 1; }
  int num_leaves() const { return 1 << depth_; }
  int leaf_node(int ordinal) const { return num_leaves() + ordinal; }

  /// Branch nodes whose left (right) subtree contains the leaf, root first.
  const std::vector<int>& left_ancestors(int leaf_ordinal) const { return left_[leaf_ordinal]; }
  const std::vector<int>& right_ancestors(int leaf_ordinal) const { return right_[leaf_ordinal]; }

 private:
  int depth_;
  std::vector<std::vector<int>> left_;
  std::vector<std::vector<int>> right_;
};

/// Symbol <-> variable id map. Blocks are allocated contiguously in the
/// fixed order a, s, z, g, x, b-, b+; ids are 1-based.
///   a(t, j)  feature j chosen at branch node t (t heap id, j 0-based)
///   s(i, t)  point i routed left at branch node t
///   z(i, l)  point i reaches leaf ordinal l
///   g(l, c)  label of leaf l is > c, c in 1..k-1
///   x(i, c)  label of point i is > c, c in 1..k-1
///   bminus(w), bplus(w) for class w (0-based)
class VariableLayout {
 public:
  static VariableLayout tree(std::size_t n, std::size_t f, int depth, int k, std::size_t mu, Objective obj);
  static VariableLayout cc(std::size_t n, int k, std::size_t mu, Objective obj);

  int n_vars() const { return n_vars_; }
  bool has_tree() const { return depth_ > 0; }
  bool has_bplus() const { return has_bplus_; }
  std::size_t num_points() const { return n_; }
  std::size_t num_features() const { return f_; }
  int depth() const { return depth_; }
  int k() const { return k_; }
  std::size_t num_classes() const { return mu_; }

  int a(int node, std::size_t feature) const { return a_base_ + (node - 1) * static_cast<int>(f_) + static_cast<int>(feature) + 1; }
  int s(std::size_t point, int node) const { return s_base_ + static_cast<int>(point) * n_branch_ + (node - 1) + 1; }
  int z(std::size_t point, int leaf) const { return z_base_ + static_cast<int>(point) * n_leaves_ + leaf + 1; }
  int g(int leaf, int c) const { return g_base_ + leaf * (k_ - 1) + (c - 1) + 1; }
  int x(std::size_t point, int c) const { return x_base_ + static_cast<int>(point) * (k_ - 1) + (c - 1) + 1; }
  int bminus(std::size_t w) const { return bm_base_ + static_cast<int>(w) + 1; }
  int bplus(std::size_t w) const { return bp_base_ + static_cast<int>(w) + 1; }

  /// Human-readable name of a variable, e.g. "x[3,1]".
  std::string symbol(int var) const;
  /// JSON sidecar: {"a":[[t,j,id],...],"s":[[i,t,id],...],...}.
  std::string to_json() const;

 private:
  std::size_t n_ = 0, f_ = 0, mu_ = 0;
  int depth_ = 0, k_ = 0, n_branch_ = 0, n_leaves_ = 0;
  bool has_bplus_ = false;
  int a_base_ = 0, s_base_ = 0, z_base_ = 0, g_base_ = 0, x_base_ = 0, bm_base_ = 0, bp_base_ = 0;
  int n_vars_ = 0;
};

/// Per feature, points sorted by value (ties by index).
struct FeatureOrders {
  std::vector<std::vector<std::uint32_t>> order;

  std::uint32_t first(std::size_t j) const { return order[j].front(); }
  std::uint32_t last(std::size_t j) const { return order[j].back(); }
};

FeatureOrders feature_orders(const Dataset& d);

struct EncodeOptions {
  Objective objective = Objective::MD_MS;
  /// Number of clusters guaranteed non-empty (k' <= k); defaults to k.
  std::optional<int> min_nonempty;
};

struct Encoding {
  WcnfFormula formula;
  VariableLayout layout;
};

/// Tree-constrained clustering. Requires 2^depth >= k, |X| >= k, k >= 2,
/// a non-empty classing and a feasible pruning outcome.
Encoding encode_tree(const Dataset& d, const TreeShape& shape, int k, const PairTable& pt, const DistanceClassing& dc,
                     const PruningOutcome& po, const EncodeOptions& opts = {});

/// Same clustering model without the tree: labels only.
Encoding encode_cc(const Dataset& d, int k, const PairTable& pt, const DistanceClassing& dc, const PruningOutcome& po,
                   const EncodeOptions& opts = {});

/// DIMACS WCNF: "p wcnf <vars> <clauses> <top>", hard clauses first.
void write_wcnf(const WcnfFormula& f, std::ostream& out);
void write_wcnf(const WcnfFormula& f, const std::filesystem::path& path);
/// Accepts the classic "p wcnf" format and the header-less format with "h" hard lines.
WcnfFormula read_wcnf(std::istream& in);
WcnfFormula read_wcnf(const std::filesystem::path& path);

}  // namespace treeclust
