#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace treeclust {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

/// A point set with optional ground truth. Rows are points, columns features.
/// Row order is the point identity used throughout (symmetry breaking, pair
/// tie-breaks, constraint indices).
struct Dataset {
  Matrix points;
  std::optional<std::vector<int>> labels;  // 0-based class ids
  std::vector<std::string> feature_names;
  std::vector<std::string> label_names;    // class id -> original text

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t num_features() const { return static_cast<std::size_t>(points.cols()); }
  bool has_labels() const { return labels.has_value(); }
};

/// Builds a dataset from an in-memory matrix, checking shape invariants.
Dataset make_dataset(Matrix points, std::optional<std::vector<int>> labels = std::nullopt);

/// Per-column min-max scaling onto [0, 100]. Constant columns become 0.
/// Exactly idempotent: a column already spanning [0, 100] is returned unchanged.
Matrix min_max_normalize(const Eigen::Ref<const Matrix>& m);

struct LoadOptions {
  std::optional<std::string> label_column;  // default: last column
  bool has_labels = true;
  bool normalize = true;
};

/// Reads a CSV with a header row.
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts = {});

/// Writes points (and labels, if any, as a trailing "label" column).
void save_dataset(const Dataset& d, const std::filesystem::path& path);

/// Unordered point pair stored with first < second.
struct IndexPair {
  std::uint32_t first = 0;
  std::uint32_t second = 0;

  friend bool operator==(const IndexPair&, const IndexPair&) = default;
  friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

IndexPair make_pair_canonical(std::size_t a, std::size_t b);

/// Must-link and cannot-link pairs, canonical orientation.
struct ConstraintSet {
  std::vector<IndexPair> ml;
  std::vector<IndexPair> cl;

  std::size_t size() const { return ml.size() + cl.size(); }
  bool empty() const { return ml.empty() && cl.empty(); }
};

/// Canonicalizes and validates a constraint set for a dataset of n points.
/// Throws DataError on self-pairs, out-of-range indices, or a pair repeated
/// within one list. A pair present in both lists is kept: it is an
/// inconsistency that pruning reports as infeasibility.
ConstraintSet make_constraints(std::size_t n, std::vector<IndexPair> ml, std::vector<IndexPair> cl);

/// Samples floor(kappa * |X|) distinct pairs uniformly and labels each ML if
/// the ground truth agrees, CL otherwise. Deterministic in `seed`.
ConstraintSet generate_constraints(const Dataset& d, double kappa, std::uint64_t seed);

/// Text format: one "ML i j" or "CL i j" per line, zero-based; '#' comments.
ConstraintSet read_constraints(const std::filesystem::path& path, std::size_t n);
void write_constraints(const ConstraintSet& cs, const std::filesystem::path& path);

/// Portable uniform integer in [0, bound) (std distributions are not
/// specified bit-for-bit across standard libraries).
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound);

/// Point pair with its Euclidean distance.
struct PairDistance {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double dist = 0.0;
};

/// Every unordered pair, sorted by (dist, i, j).
struct PairTable {
  std::size_t num_points = 0;
  std::vector<PairDistance> pairs;
  std::vector<std::uint32_t> position;  // canonical pair id -> index in `pairs`

  std::size_t size() const { return pairs.size(); }
  const PairDistance& operator[](std::size_t k) const { return pairs[k]; }

  /// Dense id of an unordered pair, independent of distances.
  std::size_t pair_id(std::size_t i, std::size_t j) const;
  /// Index of the pair (i, j) in sorted order.
  std::size_t index_of(std::size_t i, std::size_t j) const { return position[pair_id(i, j)]; }
  double distance(std::size_t i, std::size_t j) const { return pairs[index_of(i, j)].dist; }
};

PairTable pair_table(const Dataset& d);

/// Euclidean distance between two rows.
double point_distance(const Dataset& d, std::size_t i, std::size_t j);

}  // namespace treeclust
