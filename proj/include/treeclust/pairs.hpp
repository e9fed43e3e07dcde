#pragma once

#include "treeclust/data.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

namespace treeclust {

inline constexpr double kUnboundedEpsilon = std::numeric_limits<double>::infinity();

/// Partition of the sorted pair table into contiguous runs ("distance
/// classes") whose distance span is strictly below epsilon. Class indices are
/// 0-based here; the b-variables of class w are numbered w + 1 in exports.
struct DistanceClassing {
  double epsilon = 0.0;
  std::vector<std::size_t> begin;       // first pair index of each class, plus end sentinel
  std::vector<double> min_dist;
  std::vector<double> max_dist;
  std::vector<std::uint32_t> class_of;  // pair index -> class

  std::size_t size() const { return min_dist.size(); }
  std::size_t class_size(std::size_t w) const { return begin[w + 1] - begin[w]; }
};

/// Greedy sweep over ascending distances. A new class opens when the next
/// distance is >= class_min + epsilon (for epsilon == 0: on any change).
DistanceClassing build_distance_classes(const PairTable& pt, double epsilon);

/// Union-find over points for forced co-clustering plus, per component root,
/// the set of roots it is forced apart from.
class ComponentState {
 public:
  explicit ComponentState(std::size_t n);

  std::uint32_t find(std::uint32_t v) const;
  bool same_component(std::uint32_t a, std::uint32_t b) const { return find(a) == find(b); }
  bool excluded(std::uint32_t a, std::uint32_t b) const;

  /// An edge inside one existing component.
  bool is_inner(std::uint32_t a, std::uint32_t b) const { return same_component(a, b); }
  /// An edge between two components already forced apart.
  bool is_crossing(std::uint32_t a, std::uint32_t b) const { return excluded(a, b); }

  /// Merges the components of a and b. Precondition: not excluded.
  void unite(std::uint32_t a, std::uint32_t b);
  /// Records that the components of a and b are forced apart. Precondition: different components.
  void exclude(std::uint32_t a, std::uint32_t b);

  /// Structural invariants: valid forest, symmetric exclusions, no self-exclusion.
  bool valid() const;
  std::size_t num_points() const { return parent_.size(); }

 private:
  mutable std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
  std::vector<std::unordered_set<std::uint32_t>> excl_;
};

/// A pair (by pair-table index) together with its distance class.
struct ClassedPair {
  std::size_t pair = 0;
  std::uint32_t cls = 0;

  friend bool operator==(const ClassedPair&, const ClassedPair&) = default;
};

/// Which pair clauses survive pruning, and which b-variables are fixed.
struct PruningOutcome {
  std::vector<IndexPair> emit_ml;
  std::vector<IndexPair> emit_cl;
  std::vector<ClassedPair> emit_cond_plus;   // conditional co-clustering
  std::vector<ClassedPair> emit_cond_minus;  // conditional separation
  std::optional<std::uint32_t> fix_plus_false;  // class w with b+_w forced false
  std::optional<std::uint32_t> fix_minus_true;  // class w with b-_w forced true
  bool infeasible = false;

  std::size_t num_fixed_units() const { return (fix_plus_false ? 1 : 0) + (fix_minus_true ? 1 : 0); }
};

/// Graph-based redundancy elimination over must-link, cannot-link and
/// distance-implied edges. Four passes:
///   1. ML ascending: skip inner edges, otherwise merge and keep.
///   2. CL descending: an inner edge proves infeasibility; crossing edges are
///      redundant; others are recorded as exclusions and kept.
///   3. All pairs ascending (on top of pass 1-2 state): the first crossing
///      pair fixes b+ of its class to false and stops; non-inner pairs are
///      merged and kept as conditional co-clustering pairs.
///   4. Components restored to the end of pass 2; all pairs descending: the
///      first inner pair fixes b- of its class to true and stops; non-crossing
///      pairs are recorded as exclusions and kept as conditional separations.
PruningOutcome smart_pairs(const PairTable& pt, const DistanceClassing& dc, const ConstraintSet& cs);

/// Ablation baseline: every pair kept, nothing fixed.
PruningOutcome bypass_pairs(const PairTable& pt, const DistanceClassing& dc, const ConstraintSet& cs);

}  // namespace treeclust
