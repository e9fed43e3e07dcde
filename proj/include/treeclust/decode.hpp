#pragma once

#include "treeclust/data.hpp"
#include "treeclust/encoding.hpp"
#include "treeclust/pairs.hpp"
#include "treeclust/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace treeclust {

/// Complete binary tree in heap order (see TreeShape). Points go left iff
/// value <= threshold.
struct DecisionTree {
  int depth = 0;
  std::vector<int> feature;       // by branch node id; index 0 unused
  std::vector<double> threshold;  // by branch node id; index 0 unused
  std::vector<int> leaf_label;    // by leaf ordinal, 1..k

  int num_branch() const { return (1 << depth) - 1; }
  int num_leaves() const { return 1 << depth; }
  int leaf_of(const Eigen::Ref<const RowVector>& x) const;
  int predict(const Eigen::Ref<const RowVector>& x) const { return leaf_label[static_cast<std::size_t>(leaf_of(x))]; }
};

struct ClusteringSolution {
  std::optional<DecisionTree> tree;  // absent in CC mode
  int k = 0;
  int min_nonempty = 0;              // clusters required to be used
  std::vector<int> labels;           // 1..k per point
  std::vector<int> leaf_of_point;    // from the z block; empty in CC mode
  std::size_t lambda_plus = 0;       // number of leading classes forced together
  std::size_t lambda_minus = 0;      // classes at or beyond this index are separated
  double ms = 0.0;
  double md = 0.0;
  SolveStatus status = SolveStatus::UNKNOWN;
};

/// Rebuilds tree, labels and class indices from a model (model[v - 1] is var v).
/// Throws CorruptModelError when the model cannot describe a valid tree clustering.
ClusteringSolution decode(const std::vector<bool>& model, const VariableLayout& layout, const Dataset& d,
                          const PairTable& pt, SolveStatus status = SolveStatus::OPTIMAL,
                          std::optional<int> min_nonempty = std::nullopt);

/// b- and b+ true sets are prefixes and b+ implies b- classwise.
bool lambda_prefix_holds(const std::vector<bool>& model, const VariableLayout& layout);

/// Largest within-cluster and smallest between-cluster distance, computed
/// directly from the points. md = 0 with no co-clustered pair, ms = +inf with
/// no separated pair.
struct DiameterSplit {
  double md = 0.0;
  double ms = 0.0;
};
DiameterSplit diameter_split(const Dataset& d, const std::vector<int>& labels);

struct VerifyCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool ok() const;
  const VerifyCheck* find(const std::string& name) const;
  std::string summary() const;  // failed checks, one per line
};

/// Re-checks a solution against the raw dataset and constraints. Uses no code
/// from the encoder.
VerifyReport verify(const ClusteringSolution& sol, const Dataset& d, const ConstraintSet& cs,
                    const DistanceClassing& dc);

std::string tree_to_json(const DecisionTree& t, const std::vector<std::string>& feature_names = {});
std::string tree_to_text(const DecisionTree& t, const std::vector<std::string>& feature_names = {});

}  // namespace treeclust
