#pragma once

#include "treeclust/decode.hpp"
#include "treeclust/encoding.hpp"
#include "treeclust/pairs.hpp"
#include "treeclust/solver.hpp"

#include <optional>

namespace treeclust {

struct ProblemConfig {
  ClusteringMode mode = ClusteringMode::Tree;
  Objective objective = Objective::MD_MS;
  int depth = 3;
  int k = 2;
  double epsilon = 0.1;
  bool smart_pairs = true;
  std::optional<int> min_nonempty;
};

/// Everything up to (not including) solving.
struct PreparedInstance {
  DistanceClassing classes;
  PruningOutcome pruning;
  /// Absent when pruning already proved the constraints inconsistent.
  std::optional<Encoding> encoding;
};

PreparedInstance prepare_instance(const Dataset& d, const PairTable& pt, const ConstraintSet& cs,
                                  const ProblemConfig& cfg);

struct ClusteringRun {
  SolveResult solve;
  std::optional<ClusteringSolution> solution;  // present iff feasible
  std::optional<VerifyReport> report;          // present iff feasible
  std::size_t num_vars = 0;
  std::size_t num_hard = 0;
  std::size_t num_soft = 0;
  std::size_t num_classes = 0;
  bool pruned_infeasible = false;

  std::size_t num_clauses() const { return num_hard + num_soft; }
};

/// Prepares, solves, decodes and verifies one instance. Verification failures
/// are reported in `report`, not thrown.
ClusteringRun solve_clustering(const Dataset& d, const PairTable& pt, const ConstraintSet& cs,
                               const ProblemConfig& cfg, const SolverBackend& backend,
                               double time_limit = kDefaultTimeLimit);

}  // namespace treeclust
