#pragma once

#include "treeclust/data.hpp"

#include <span>
#include <vector>

namespace treeclust {

/// Objective values of one clustering: smallest between-cluster distance and
/// largest within-cluster distance.
struct ParetoPoint {
  double ms = 0.0;
  double md = 0.0;

  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

struct OracleResult {
  bool feasible = false;
  double min_md = 0.0;
  /// Non-dominated (max ms, min md) points, ascending md.
  std::vector<ParetoPoint> front;
  /// Every canonical labeling (1-based, first-occurrence order) attaining min_md.
  std::vector<std::vector<int>> optimal_labelings;
  std::size_t num_feasible = 0;
};

/// Exhaustive search over canonical labelings using exactly k clusters.
/// Limits: |X| <= 12, k <= 4.
OracleResult cc_oracle(const Dataset& d, int k, const ConstraintSet& cs);

/// Exhaustive search over complete trees of the given depth whose branch
/// thresholds are midpoints of consecutive distinct feature values, times all
/// leaf labelings. Limits: |F| <= 2, depth <= 2, |X| <= 10.
OracleResult tree_oracle(const Dataset& d, int depth, int k, const ConstraintSet& cs);

struct MetricScores {
  double ari = 0.0;
  double nmi = 0.0;
};

MetricScores metrics_oracle(std::span<const int> a, std::span<const int> b);

}  // namespace treeclust
