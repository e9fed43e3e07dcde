#include "treeclust/metrics.hpp"

#include "treeclust/error.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace treeclust {

namespace {

struct Contingency {
  std::vector<double> rows, cols;
  std::map<std::pair<int, int>, double> cells;
  double n = 0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ConfigError("label vectors differ in length");
  std::map<int, std::size_t> ra, rb;
  for (int v : a) ra.emplace(v, ra.size());
  for (int v : b) rb.emplace(v, rb.size());
  Contingency t;
  t.rows.assign(ra.size(), 0.0);
  t.cols.assign(rb.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int r = static_cast<int>(ra[a[i]]), c = static_cast<int>(rb[b[i]]);
    t.cells[{r, c}] += 1.0;
    t.rows[static_cast<std::size_t>(r)] += 1.0;
    t.cols[static_cast<std::size_t>(c)] += 1.0;
  }
  t.n = static_cast<double>(a.size());
  return t;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  const Contingency t = contingency(a, b);
  double index = 0, sa = 0, sb = 0;
  for (const auto& [rc, v] : t.cells) index += choose2(v);
  for (double v : t.rows) sa += choose2(v);
  for (double v : t.cols) sb += choose2(v);
  const double total = choose2(t.n);
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double denom = 0.5 * (sa + sb) - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double normalized_mutual_info(std::span<const int> a, std::span<const int> b) {
  const Contingency t = contingency(a, b);
  if (t.n == 0) return 1.0;
  auto entropy = [&](const std::vector<double>& m) {
    double h = 0;
    for (double v : m)
      if (v > 0) h -= v / t.n * std::log(v / t.n);
    return h;
  };
  const double ha = entropy(t.rows), hb = entropy(t.cols);
  if (ha * hb == 0.0) return t.cells.size() == t.rows.size() && t.rows.size() == t.cols.size() ? 1.0 : 0.0;
  double mi = 0;
  for (const auto& [rc, v] : t.cells) {
    const double pr = t.rows[static_cast<std::size_t>(rc.first)], pc = t.cols[static_cast<std::size_t>(rc.second)];
    mi += v / t.n * std::log(v * t.n / (pr * pc));
  }
  return mi / std::sqrt(ha * hb);
}

}  // namespace treeclust
