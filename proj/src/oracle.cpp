#include "treeclust/oracle.hpp"

#include "treeclust/error.hpp"
#include "treeclust/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace treeclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<double>> distance_matrix(const Dataset& d) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t f = 0; f < d.num_features(); ++f) {
        const double diff = d.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) -
                            d.points(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(f));
        s += diff * diff;
      }
      m[i][j] = std::sqrt(s);
    }
  return m;
}

// Collects objective values of feasible labelings and reduces them.
class Collector {
 public:
  Collector(const Dataset& d, const ConstraintSet& cs) : dist_(distance_matrix(d)), cs_(cs) {}

  bool respects(const std::vector<int>& lab) const {
    for (const auto& p : cs_.ml)
      if (lab[p.first] != lab[p.second]) return false;
    for (const auto& p : cs_.cl)
      if (lab[p.first] == lab[p.second]) return false;
    return true;
  }

  void add(const std::vector<int>& lab) {
    if (!respects(lab)) return;
    double md = 0, ms = kInf;
    for (std::size_t i = 0; i < lab.size(); ++i)
      for (std::size_t j = i + 1; j < lab.size(); ++j) {
        if (lab[i] == lab[j])
          md = std::max(md, dist_[i][j]);
        else
          ms = std::min(ms, dist_[i][j]);
      }
    ++res_.num_feasible;
    points_.push_back({ms, md});
    if (!res_.feasible || md < res_.min_md) {
      res_.feasible = true;
      res_.min_md = md;
      res_.optimal_labelings.clear();
    }
    if (md == res_.min_md) res_.optimal_labelings.push_back(lab);
  }

  OracleResult finish() {
    std::sort(points_.begin(), points_.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
      return a.md != b.md ? a.md < b.md : a.ms > b.ms;
    });
    double best_ms = -kInf;
    for (const auto& p : points_) {
      if (p.ms > best_ms) {
        res_.front.push_back(p);
        best_ms = p.ms;
      }
    }
    return std::move(res_);
  }

 private:
  std::vector<std::vector<double>> dist_;
  const ConstraintSet& cs_;
  OracleResult res_;
  std::vector<ParetoPoint> points_;
};

void enumerate_canonical(std::vector<int>& lab, std::size_t i, int used, int k, Collector& col) {
  const std::size_t n = lab.size();
  if (i == n) {
    if (used == k) col.add(lab);
    return;
  }
  if (static_cast<std::size_t>(k - used) > n - i) return;
  for (int c = 1; c <= std::min(used + 1, k); ++c) {
    lab[i] = c;
    enumerate_canonical(lab, i + 1, std::max(used, c), k, col);
  }
}

std::vector<int> canonicalize(const std::vector<int>& lab) {
  std::vector<int> map_to(lab.size() + 64, 0);
  std::vector<int> out(lab.size());
  int next = 1;
  for (std::size_t i = 0; i < lab.size(); ++i) {
    auto& m = map_to[static_cast<std::size_t>(lab[i])];
    if (m == 0) m = next++;
    out[i] = m;
  }
  return out;
}

}  // namespace

OracleResult cc_oracle(const Dataset& d, int k, const ConstraintSet& cs) {
  if (d.size() > 12 || k > 4) throw ConfigError("cc_oracle: instance too large (|X| <= 12, k <= 4)");
  if (k < 1) throw ConfigError("cc_oracle: k must be positive");
  Collector col(d, cs);
  std::vector<int> lab(d.size(), 0);
  if (d.size() > 0) {
    lab[0] = 1;
    enumerate_canonical(lab, 1, 1, k, col);
  }
  return col.finish();
}

OracleResult tree_oracle(const Dataset& d, int depth, int k, const ConstraintSet& cs) {
  if (d.num_features() > 2 || depth > 2 || d.size() > 10)
    throw ConfigError("tree_oracle: instance too large (|F| <= 2, depth <= 2, |X| <= 10)");
  if (depth < 1 || k < 1) throw ConfigError("tree_oracle: depth and k must be positive");
  const std::size_t n = d.size();

  struct Split {
    int feature;
    double threshold;
  };
  std::vector<Split> splits;
  for (std::size_t f = 0; f < d.num_features(); ++f) {
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = d.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    for (std::size_t t = 0; t + 1 < vals.size(); ++t)
      splits.push_back({static_cast<int>(f), vals[t] + (vals[t + 1] - vals[t]) / 2.0});
  }

  const int n_branch = (1 << depth) - 1;
  const int n_leaves = 1 << depth;
  // Distinct point-to-leaf maps over all split choices.
  std::set<std::vector<int>> leaf_maps;
  std::vector<std::size_t> choice(static_cast<std::size_t>(n_branch), 0);
  if (!splits.empty()) {
    for (;;) {
      std::vector<int> leaf(n);
      for (std::size_t i = 0; i < n; ++i) {
        int t = 1;
        while (t <= n_branch) {
          const Split& s = splits[choice[static_cast<std::size_t>(t - 1)]];
          t = d.points(static_cast<Eigen::Index>(i), s.feature) <= s.threshold ? 2 * t : 2 * t + 1;
        }
        leaf[i] = t - n_leaves;
      }
      leaf_maps.insert(std::move(leaf));
      std::size_t pos = 0;
      while (pos < choice.size() && ++choice[pos] == splits.size()) choice[pos++] = 0;
      if (pos == choice.size()) break;
    }
  }

  std::set<std::vector<int>> labelings;
  std::vector<int> leaf_label(static_cast<std::size_t>(n_leaves), 0);
  for (const auto& lm : leaf_maps) {
    std::fill(leaf_label.begin(), leaf_label.end(), 0);
    for (;;) {
      std::vector<int> lab(n);
      for (std::size_t i = 0; i < n; ++i) lab[i] = leaf_label[static_cast<std::size_t>(lm[i])] + 1;
      std::vector<int> canon = canonicalize(lab);
      if (!canon.empty() && *std::max_element(canon.begin(), canon.end()) == k) labelings.insert(std::move(canon));
      std::size_t pos = 0;
      while (pos < leaf_label.size() && ++leaf_label[pos] == k) leaf_label[pos++] = 0;
      if (pos == leaf_label.size()) break;
    }
  }

  Collector col(d, cs);
  for (const auto& lab : labelings) col.add(lab);
  return col.finish();
}

MetricScores metrics_oracle(std::span<const int> a, std::span<const int> b) {
  return {adjusted_rand_index(a, b), normalized_mutual_info(a, b)};
}

}  // namespace treeclust
