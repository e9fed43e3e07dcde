#include "treeclust/sat.hpp"

#include <algorithm>
#include <cmath>

namespace treeclust::sat {

namespace {

// Luby sequence scaled by y: 1 1 2 1 1 2 4 ...
double luby(double y, int x) {
  int size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return std::pow(y, seq);
}

}  // namespace

int Solver::new_var() {
  const int v = num_vars();
  assigns_.push_back(kUndef);
  level_.push_back(0);
  reason_.push_back(kNoReason);
  trail_pos_.push_back(0);
  phase_.push_back(false);
  activity_.push_back(0.0);
  seen_.push_back(0);
  watches_.emplace_back();
  watches_.emplace_back();
  budget_index_.push_back(-1);
  budget_index_.push_back(-1);
  heap_index_.push_back(-1);
  heap_insert(v);
  return v;
}

bool Solver::add_clause(std::span<const Lit> in) {
  if (!ok_) return false;
  cancel_until(0);
  std::vector<Lit> c(in.begin(), in.end());
  std::sort(c.begin(), c.end(), [](Lit a, Lit b) { return a.code < b.code; });
  std::size_t out = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (out > 0 && c[out - 1] == c[k]) continue;
    if (out > 0 && c[out - 1] == ~c[k]) return true;  // tautology
    const auto val = value(c[k]);
    if (val == kTrue) return true;
    if (val == kFalse) continue;
    c[out++] = c[k];
  }
  c.resize(out);
  if (c.empty()) {
    ok_ = false;
    return false;
  }
  if (c.size() == 1) {
    enqueue(c[0], kNoReason);
    if (propagate() != kNoConflict) ok_ = false;
    return ok_;
  }
  const std::uint32_t cr = alloc_clause(c, false);
  attach(cr);
  return true;
}

void Solver::set_budget(std::vector<Lit> lits, std::vector<std::uint64_t> weights, std::uint64_t bound) {
  cancel_until(0);
  std::vector<std::size_t> idx(lits.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return weights[a] > weights[b]; });
  budget_lits_.clear();
  budget_w_.clear();
  for (std::size_t k : idx) {
    if (weights[k] == 0) continue;
    budget_index_[lits[k].code] = static_cast<std::int32_t>(budget_lits_.size());
    budget_lits_.push_back(lits[k]);
    budget_w_.push_back(weights[k]);
  }
  budget_sum_ = 0;
  for (std::size_t k = 0; k < budget_lits_.size(); ++k)
    if (value(budget_lits_[k]) == kTrue) budget_sum_ += budget_w_[k];
  bound_ = bound;
  has_budget_ = true;
}

void Solver::tighten_budget(std::uint64_t bound) {
  cancel_until(0);
  bound_ = std::min(bound_, bound);
}

std::uint32_t Solver::alloc_clause(std::span<const Lit> c, bool learnt) {
  std::uint32_t cr;
  if (!free_slots_.empty()) {
    cr = free_slots_.back();
    free_slots_.pop_back();
  } else {
    cr = static_cast<std::uint32_t>(clauses_.size());
    clauses_.emplace_back();
  }
  auto& info = clauses_[cr];
  info.start = static_cast<std::uint32_t>(arena_.size());
  info.size = static_cast<std::uint32_t>(c.size());
  info.activity = 0.0f;
  info.learnt = learnt;
  info.deleted = false;
  arena_.insert(arena_.end(), c.begin(), c.end());
  return cr;
}

void Solver::attach(std::uint32_t cr) {
  const Lit* c = lits(cr);
  watches_[c[0].code].push_back({cr, c[1]});
  watches_[c[1].code].push_back({cr, c[0]});
}

void Solver::free_clause(std::uint32_t cr) {
  auto& info = clauses_[cr];
  wasted_ += info.size;
  info.deleted = true;
  info.size = 0;
  free_slots_.push_back(cr);
}

void Solver::enqueue(Lit l, std::uint32_t reason) {
  const auto v = static_cast<std::size_t>(l.var());
  assigns_[v] = l.negated() ? kFalse : kTrue;
  level_[v] = decision_level();
  reason_[v] = reason;
  trail_pos_[v] = static_cast<std::uint32_t>(trail_.size());
  trail_.push_back(l);
  if (has_budget_) {
    const auto bi = budget_index_[l.code];
    if (bi >= 0) budget_sum_ += budget_w_[static_cast<std::size_t>(bi)];
  }
}

std::uint32_t Solver::propagate_budget() {
  if (budget_sum_ > bound_) return kBudgetConflict;
  const std::uint64_t slack = bound_ - budget_sum_;
  for (std::size_t k = 0; k < budget_lits_.size(); ++k) {
    if (budget_w_[k] <= slack) break;
    if (value(budget_lits_[k]) == kUndef) enqueue(~budget_lits_[k], kBudgetReason);
  }
  return kNoConflict;
}

std::uint32_t Solver::propagate() {
  while (qhead_ < trail_.size()) {
    const Lit p = trail_[qhead_++];
    ++stats_.propagations;
    const Lit false_lit = ~p;
    auto& ws = watches_[false_lit.code];
    std::size_t i = 0, j = 0;
    std::uint32_t confl = kNoConflict;
    while (i < ws.size()) {
      const Watcher w = ws[i];
      if (value(w.blocker) == kTrue) {
        ws[j++] = ws[i++];
        continue;
      }
      const std::uint32_t cr = w.cref;
      Lit* c = lits(cr);
      const std::uint32_t sz = clauses_[cr].size;
      if (c[0] == false_lit) std::swap(c[0], c[1]);
      ++i;
      const Lit first = c[0];
      const Watcher nw{cr, first};
      if (first != w.blocker && value(first) == kTrue) {
        ws[j++] = nw;
        continue;
      }
      bool moved = false;
      for (std::uint32_t k = 2; k < sz; ++k) {
        if (value(c[k]) != kFalse) {
          c[1] = c[k];
          c[k] = false_lit;
          watches_[c[1].code].push_back(nw);
          moved = true;
          break;
        }
      }
      if (moved) continue;
      ws[j++] = nw;
      if (value(first) == kFalse) {
        confl = cr;
        qhead_ = trail_.size();
        while (i < ws.size()) ws[j++] = ws[i++];
      } else {
        enqueue(first, cr);
      }
    }
    ws.resize(j);
    if (confl != kNoConflict) return confl;
    if (has_budget_ && budget_index_[p.code] >= 0) {
      const std::uint32_t bc = propagate_budget();
      if (bc != kNoConflict) {
        qhead_ = trail_.size();
        return bc;
      }
    }
  }
  return kNoConflict;
}

void Solver::explain(std::uint32_t reason, int implied_var, bool is_conflict, std::vector<Lit>& out) {
  out.clear();
  if (reason == kBudgetReason || reason == kBudgetConflict) {
    // The budget lits that were true when the implication (or overflow) happened.
    const std::uint32_t limit = is_conflict ? static_cast<std::uint32_t>(trail_.size())
                                            : trail_pos_[static_cast<std::size_t>(implied_var)];
    for (const Lit q : budget_lits_)
      if (value(q) == kTrue && trail_pos_[static_cast<std::size_t>(q.var())] < limit) out.push_back(~q);
    return;
  }
  const Lit* c = lits(reason);
  const std::uint32_t sz = clauses_[reason].size;
  for (std::uint32_t k = is_conflict ? 0 : 1; k < sz; ++k) out.push_back(c[k]);
}

void Solver::analyze(std::uint32_t confl, std::vector<Lit>& learnt, int& bt_level) {
  learnt.clear();
  learnt.push_back(Lit{});
  int path = 0;
  Lit p{};
  std::size_t idx = trail_.size();
  std::uint32_t reason = confl;
  bool is_conflict = true;
  int implied_var = -1;
  do {
    if (reason != kBudgetReason && reason != kBudgetConflict && clauses_[reason].learnt) bump_clause(reason);
    explain(reason, implied_var, is_conflict, scratch_);
    for (const Lit q : scratch_) {
      const auto v = static_cast<std::size_t>(q.var());
      if (!seen_[v] && level_[v] > 0) {
        bump_var(q.var());
        seen_[v] = 1;
        if (level_[v] >= decision_level())
          ++path;
        else
          learnt.push_back(q);
      }
    }
    do {
      --idx;
    } while (!seen_[static_cast<std::size_t>(trail_[idx].var())]);
    p = trail_[idx];
    implied_var = p.var();
    reason = reason_[static_cast<std::size_t>(implied_var)];
    is_conflict = false;
    seen_[static_cast<std::size_t>(implied_var)] = 0;
    --path;
  } while (path > 0);
  learnt[0] = ~p;

  // Drop literals implied by the rest of the clause.
  analyze_stack_.assign(learnt.begin(), learnt.end());
  std::size_t out = 1;
  for (std::size_t k = 1; k < learnt.size(); ++k)
    if (!redundant(learnt[k])) learnt[out++] = learnt[k];
  learnt.resize(out);
  for (std::size_t k = 1; k < analyze_stack_.size(); ++k) seen_[static_cast<std::size_t>(analyze_stack_[k].var())] = 0;

  bt_level = 0;
  if (learnt.size() > 1) {
    std::size_t max_k = 1;
    for (std::size_t k = 2; k < learnt.size(); ++k)
      if (level(learnt[k].var()) > level(learnt[max_k].var())) max_k = k;
    std::swap(learnt[1], learnt[max_k]);
    bt_level = level(learnt[1].var());
  }
}

bool Solver::redundant(Lit l) {
  const int v = l.var();
  const std::uint32_t r = reason_[static_cast<std::size_t>(v)];
  if (r == kNoReason) return false;
  std::vector<Lit> tmp;
  explain(r, v, false, tmp);
  for (const Lit q : tmp) {
    const auto qv = static_cast<std::size_t>(q.var());
    if (!seen_[qv] && level_[qv] > 0) return false;
  }
  return true;
}

void Solver::cancel_until(int lvl) {
  if (decision_level() <= lvl) return;
  const std::size_t stop = trail_lim_[static_cast<std::size_t>(lvl)];
  for (std::size_t c = trail_.size(); c-- > stop;) {
    const Lit l = trail_[c];
    const auto v = static_cast<std::size_t>(l.var());
    if (has_budget_) {
      const auto bi = budget_index_[l.code];
      if (bi >= 0) budget_sum_ -= budget_w_[static_cast<std::size_t>(bi)];
    }
    phase_[v] = !l.negated();
    assigns_[v] = kUndef;
    reason_[v] = kNoReason;
    if (!heap_contains(l.var())) heap_insert(l.var());
  }
  trail_.resize(stop);
  trail_lim_.resize(static_cast<std::size_t>(lvl));
  qhead_ = trail_.size();
}

Lit Solver::pick_branch() {
  while (!heap_.empty()) {
    const int v = heap_pop();
    if (assigns_[static_cast<std::size_t>(v)] == kUndef) return Lit::make(v, !phase_[static_cast<std::size_t>(v)]);
  }
  return Lit{0xffffffffu};
}

bool Solver::locked(std::uint32_t cr) {
  const Lit first = lits(cr)[0];
  return value(first) == kTrue && reason_[static_cast<std::size_t>(first.var())] == cr;
}

void Solver::reduce_db() {
  std::sort(learnts_.begin(), learnts_.end(),
            [&](std::uint32_t a, std::uint32_t b) { return clauses_[a].activity < clauses_[b].activity; });
  const std::size_t half = learnts_.size() / 2;
  std::size_t out = 0;
  for (std::size_t k = 0; k < learnts_.size(); ++k) {
    const std::uint32_t cr = learnts_[k];
    if (k < half && clauses_[cr].size > 2 && !locked(cr))
      free_clause(cr);
    else
      learnts_[out++] = cr;
  }
  learnts_.resize(out);
  for (auto& ws : watches_)
    ws.erase(std::remove_if(ws.begin(), ws.end(), [&](const Watcher& w) { return clauses_[w.cref].deleted; }), ws.end());
  if (wasted_ * 2 > arena_.size()) compact_arena();
  max_learnts_ *= 1.1;
}

void Solver::compact_arena() {
  std::vector<Lit> fresh;
  fresh.reserve(arena_.size() - wasted_);
  for (auto& info : clauses_) {
    if (info.deleted) continue;
    const std::uint32_t start = static_cast<std::uint32_t>(fresh.size());
    fresh.insert(fresh.end(), arena_.begin() + info.start, arena_.begin() + info.start + info.size);
    info.start = start;
  }
  arena_ = std::move(fresh);
  wasted_ = 0;
}

void Solver::bump_var(int v) {
  const auto sv = static_cast<std::size_t>(v);
  if ((activity_[sv] += var_inc_) > 1e100) {
    for (auto& a : activity_) a *= 1e-100;
    var_inc_ *= 1e-100;
  }
  if (heap_contains(v)) heap_up(static_cast<std::size_t>(heap_index_[sv]));
}

void Solver::bump_clause(std::uint32_t cr) {
  if ((clauses_[cr].activity += static_cast<float>(clause_inc_)) > 1e20f) {
    for (std::uint32_t l : learnts_) clauses_[l].activity *= 1e-20f;
    clause_inc_ *= 1e-20;
  }
}

void Solver::heap_insert(int v) {
  heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(heap_.size());
  heap_.push_back(v);
  heap_up(heap_.size() - 1);
}

void Solver::heap_up(std::size_t pos) {
  const int v = heap_[pos];
  const double act = activity_[static_cast<std::size_t>(v)];
  while (pos > 0) {
    const std::size_t parent = (pos - 1) / 2;
    if (activity_[static_cast<std::size_t>(heap_[parent])] >= act) break;
    heap_[pos] = heap_[parent];
    heap_index_[static_cast<std::size_t>(heap_[pos])] = static_cast<int>(pos);
    pos = parent;
  }
  heap_[pos] = v;
  heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(pos);
}

void Solver::heap_down(std::size_t pos) {
  const int v = heap_[pos];
  const double act = activity_[static_cast<std::size_t>(v)];
  for (;;) {
    std::size_t child = 2 * pos + 1;
    if (child >= heap_.size()) break;
    if (child + 1 < heap_.size() &&
        activity_[static_cast<std::size_t>(heap_[child + 1])] > activity_[static_cast<std::size_t>(heap_[child])])
      ++child;
    if (activity_[static_cast<std::size_t>(heap_[child])] <= act) break;
    heap_[pos] = heap_[child];
    heap_index_[static_cast<std::size_t>(heap_[pos])] = static_cast<int>(pos);
    pos = child;
  }
  heap_[pos] = v;
  heap_index_[static_cast<std::size_t>(v)] = static_cast<int>(pos);
}

int Solver::heap_pop() {
  const int top = heap_.front();
  heap_index_[static_cast<std::size_t>(top)] = -1;
  const int last = heap_.back();
  heap_.pop_back();
  if (!heap_.empty()) {
    heap_[0] = last;
    heap_index_[static_cast<std::size_t>(last)] = 0;
    heap_down(0);
  }
  return top;
}

Result Solver::solve(std::optional<Clock::time_point> deadline) {
  model_.clear();
  if (!ok_) return Result::Unsat;
  cancel_until(0);
  if (has_budget_ && propagate_budget() != kNoConflict) {
    ok_ = false;
    return Result::Unsat;
  }
  if (propagate() != kNoConflict) {
    ok_ = false;
    return Result::Unsat;
  }

  std::size_t n_original = 0;
  for (const auto& c : clauses_)
    if (!c.deleted && !c.learnt) ++n_original;
  max_learnts_ = std::max(max_learnts_, std::max(2000.0, static_cast<double>(n_original) / 3.0));

  std::vector<Lit> learnt;
  int restarts = 0;
  std::uint64_t restart_limit = static_cast<std::uint64_t>(luby(2.0, restarts) * 100.0);
  std::uint64_t since_restart = 0;

  for (;;) {
    const std::uint32_t confl = propagate();
    if (confl != kNoConflict) {
      ++stats_.conflicts;
      ++since_restart;
      if (decision_level() == 0) {
        ok_ = false;
        return Result::Unsat;
      }
      int bt = 0;
      analyze(confl, learnt, bt);
      cancel_until(bt);
      if (learnt.size() == 1) {
        enqueue(learnt[0], kNoReason);
      } else {
        const std::uint32_t cr = alloc_clause(learnt, true);
        attach(cr);
        learnts_.push_back(cr);
        bump_clause(cr);
        enqueue(learnt[0], cr);
      }
      var_inc_ /= 0.95;
      clause_inc_ /= 0.999;
      if (deadline && (stats_.conflicts & 255u) == 0 && Clock::now() >= *deadline) {
        cancel_until(0);
        return Result::Interrupted;
      }
      continue;
    }

    if (since_restart >= restart_limit) {
      cancel_until(0);
      ++restarts;
      ++stats_.restarts;
      since_restart = 0;
      restart_limit = static_cast<std::uint64_t>(luby(2.0, restarts) * 100.0);
      continue;
    }
    if (static_cast<double>(learnts_.size()) >= max_learnts_ + static_cast<double>(trail_.size())) reduce_db();

    const Lit next = pick_branch();
    if (next.code == 0xffffffffu) {
      model_.resize(assigns_.size());
      for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == kTrue;
      cancel_until(0);
      return Result::Sat;
    }
    ++stats_.decisions;
    if (deadline && (stats_.decisions & 1023u) == 0 && Clock::now() >= *deadline) {
      cancel_until(0);
      return Result::Interrupted;
    }
    trail_lim_.push_back(trail_.size());
    enqueue(next, kNoReason);
  }
}

}  // namespace treeclust::sat
