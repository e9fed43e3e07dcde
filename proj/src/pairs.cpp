#include "treeclust/pairs.hpp"

#include "treeclust/error.hpp"

#include <algorithm>
#include <cmath>

namespace treeclust {

DistanceClassing build_distance_classes(const PairTable& pt, double epsilon) {
  if (pt.size() == 0) throw ConfigError("distance classes need at least one pair");
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");

  DistanceClassing dc;
  dc.epsilon = epsilon;
  dc.class_of.resize(pt.size());

  auto open = [&](std::size_t k) {
    dc.begin.push_back(k);
    dc.min_dist.push_back(pt[k].dist);
    dc.max_dist.push_back(pt[k].dist);
  };

  open(0);
  for (std::size_t k = 0; k < pt.size(); ++k) {
    const double d = pt[k].dist;
    const double lo = dc.min_dist.back();
    const bool split = (epsilon == 0.0) ? (d != lo) : (d - lo >= epsilon);
    if (k > 0 && split) open(k);
    dc.max_dist.back() = d;
    dc.class_of[k] = static_cast<std::uint32_t>(dc.min_dist.size() - 1);
  }
  dc.begin.push_back(pt.size());
  return dc;
}

ComponentState::ComponentState(std::size_t n) : parent_(n), size_(n, 1), excl_(n) {
  for (std::size_t v = 0; v < n; ++v) parent_[v] = static_cast<std::uint32_t>(v);
}

std::uint32_t ComponentState::find(std::uint32_t v) const {
  std::uint32_t root = v;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[v] != root) {
    const std::uint32_t next = parent_[v];
    parent_[v] = root;
    v = next;
  }
  return root;
}

bool ComponentState::excluded(std::uint32_t a, std::uint32_t b) const {
  const std::uint32_t ra = find(a);
  const std::uint32_t rb = find(b);
  if (ra == rb) return false;
  if (excl_[ra].size() <= excl_[rb].size()) return excl_[ra].contains(rb);
  return excl_[rb].contains(ra);
}

void ComponentState::unite(std::uint32_t a, std::uint32_t b) {
  std::uint32_t ra = find(a);
  std::uint32_t rb = find(b);
  if (ra == rb) return;
  if (size_[ra] < size_[rb]) std::swap(ra, rb);
  // rb is absorbed into ra; its exclusions move over, small into large.
  parent_[rb] = ra;
  size_[ra] += size_[rb];
  auto moved = std::move(excl_[rb]);
  excl_[rb].clear();
  for (std::uint32_t other : moved) {
    excl_[other].erase(rb);
    excl_[other].insert(ra);
    excl_[ra].insert(other);
  }
}

void ComponentState::exclude(std::uint32_t a, std::uint32_t b) {
  const std::uint32_t ra = find(a);
  const std::uint32_t rb = find(b);
  excl_[ra].insert(rb);
  excl_[rb].insert(ra);
}

bool ComponentState::valid() const {
  const std::size_t n = parent_.size();
  for (std::size_t v = 0; v < n; ++v) {
    // Walk must terminate within n steps.
    std::uint32_t u = static_cast<std::uint32_t>(v);
    std::size_t steps = 0;
    while (parent_[u] != u) {
      u = parent_[u];
      if (++steps > n) return false;
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    if (!excl_[r].empty() && parent_[r] != r) return false;
    for (std::uint32_t o : excl_[r]) {
      if (o == r) return false;
      if (parent_[o] != o) return false;
      if (!excl_[o].contains(static_cast<std::uint32_t>(r))) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::size_t> sorted_positions(const PairTable& pt, const std::vector<IndexPair>& pairs) {
  std::vector<std::size_t> pos;
  pos.reserve(pairs.size());
  for (const auto& p : pairs) pos.push_back(pt.index_of(p.first, p.second));
  std::sort(pos.begin(), pos.end());
  return pos;
}

IndexPair endpoints(const PairTable& pt, std::size_t k) { return {pt[k].i, pt[k].j}; }

}  // namespace

PruningOutcome smart_pairs(const PairTable& pt, const DistanceClassing& dc, const ConstraintSet& cs) {
  PruningOutcome out;
  ComponentState state(pt.num_points);

  for (std::size_t k : sorted_positions(pt, cs.ml)) {
    const auto [a, b] = endpoints(pt, k);
    if (state.is_inner(a, b)) continue;
    state.unite(a, b);
    out.emit_ml.push_back({a, b});
  }

  const auto cl_pos = sorted_positions(pt, cs.cl);
  for (auto it = cl_pos.rbegin(); it != cl_pos.rend(); ++it) {
    const auto [a, b] = endpoints(pt, *it);
    if (state.is_inner(a, b)) {
      out.infeasible = true;
      return out;
    }
    if (state.is_crossing(a, b)) continue;
    state.exclude(a, b);
    out.emit_cl.push_back({a, b});
  }

  const ComponentState snapshot = state;

  for (std::size_t k = 0; k < pt.size(); ++k) {
    const auto [a, b] = endpoints(pt, k);
    const std::uint32_t w = dc.class_of[k];
    if (state.is_crossing(a, b)) {
      out.fix_plus_false = w;
      break;
    }
    if (!state.is_inner(a, b)) {
      state.unite(a, b);
      out.emit_cond_plus.push_back({k, w});
    }
  }

  state = snapshot;

  for (std::size_t k = pt.size(); k-- > 0;) {
    const auto [a, b] = endpoints(pt, k);
    const std::uint32_t w = dc.class_of[k];
    if (state.is_inner(a, b)) {
      out.fix_minus_true = w;
      break;
    }
    if (!state.is_crossing(a, b)) {
      state.exclude(a, b);
      out.emit_cond_minus.push_back({k, w});
    }
  }
  return out;
}

PruningOutcome bypass_pairs(const PairTable& pt, const DistanceClassing& dc, const ConstraintSet& cs) {
  PruningOutcome out;
  for (std::size_t k : sorted_positions(pt, cs.ml)) out.emit_ml.push_back(endpoints(pt, k));
  const auto cl_pos = sorted_positions(pt, cs.cl);
  for (auto it = cl_pos.rbegin(); it != cl_pos.rend(); ++it) out.emit_cl.push_back(endpoints(pt, *it));
  out.emit_cond_plus.reserve(pt.size());
  for (std::size_t k = 0; k < pt.size(); ++k) out.emit_cond_plus.push_back({k, dc.class_of[k]});
  out.emit_cond_minus.reserve(pt.size());
  for (std::size_t k = pt.size(); k-- > 0;) out.emit_cond_minus.push_back({k, dc.class_of[k]});
  return out;
}

}  // namespace treeclust
