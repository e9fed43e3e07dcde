#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace treeclust::sat {

/// Literal encoded as 2 * var + sign (sign 1 = negated); vars are 0-based.
struct Lit {
  std::uint32_t code = 0;

  static Lit make(int var, bool negated) { return {static_cast<std::uint32_t>(var) * 2u + (negated ? 1u : 0u)}; }
  /// From a signed 1-based DIMACS literal.
  static Lit from_dimacs(int l) { return make((l > 0 ? l : -l) - 1, l < 0); }

  int var() const { return static_cast<int>(code >> 1); }
  bool negated() const { return (code & 1u) != 0; }
  int to_dimacs() const { return negated() ? -(var() + 1) : var() + 1; }
  Lit operator~() const { return {code ^ 1u}; }

  friend bool operator==(Lit, Lit) = default;
};

enum class Result { Sat, Unsat, Interrupted };

struct Stats {
  std::uint64_t decisions = 0;
  std::uint64_t conflicts = 0;
  std::uint64_t propagations = 0;
  std::uint64_t restarts = 0;
};

/// Conflict-driven clause-learning SAT solver: two watched literals, first-UIP
/// learning with clause minimization, VSIDS, phase saving, Luby restarts and
/// activity-based learnt-clause reduction.
///
/// Besides clauses it supports one weighted budget constraint
///   sum { w_i : lit_i true } <= bound
/// propagated natively (explanations are generated lazily from the trail).
/// The bound may only be tightened between calls, which keeps every learnt
/// clause valid; this is what the linear-search MaxSAT loop relies on.
class Solver {
 public:
  using Clock = std::chrono::steady_clock;

  int new_var();
  int num_vars() const { return static_cast<int>(assigns_.size()); }

  /// Adds a clause at the root. Returns false once the formula is known unsat.
  bool add_clause(std::span<const Lit> lits);

  /// Installs the budget constraint (once, before the first solve).
  void set_budget(std::vector<Lit> lits, std::vector<std::uint64_t> weights, std::uint64_t bound);
  /// Tightens the bound. Raising it is not supported.
  void tighten_budget(std::uint64_t bound);

  /// Initial polarity for decisions on `var`.
  void set_phase(int var, bool value) { phase_[static_cast<std::size_t>(var)] = value; }

  Result solve(std::optional<Clock::time_point> deadline = std::nullopt);

  /// Assignment from the last Sat result, indexed by var.
  const std::vector<bool>& model() const { return model_; }
  bool okay() const { return ok_; }
  const Stats& stats() const { return stats_; }

 private:
  enum : std::uint8_t { kFalse = 0, kTrue = 1, kUndef = 2 };
  static constexpr std::uint32_t kNoReason = 0xffffffffu;
  static constexpr std::uint32_t kBudgetReason = 0xfffffffeu;
  static constexpr std::uint32_t kNoConflict = 0xffffffffu;
  static constexpr std::uint32_t kBudgetConflict = 0xfffffffeu;

  struct ClauseInfo {
    std::uint32_t start = 0;
    std::uint32_t size = 0;
    float activity = 0.0f;
    bool learnt = false;
    bool deleted = false;
  };
  struct Watcher {
    std::uint32_t cref;
    Lit blocker;
  };

  std::uint8_t value(Lit l) const {
    const std::uint8_t a = assigns_[static_cast<std::size_t>(l.var())];
    if (a == kUndef) return kUndef;
    return static_cast<std::uint8_t>(a ^ static_cast<std::uint8_t>(l.negated()));
  }
  int level(int v) const { return level_[static_cast<std::size_t>(v)]; }
  int decision_level() const { return static_cast<int>(trail_lim_.size()); }
  Lit* lits(std::uint32_t cref) { return arena_.data() + clauses_[cref].start; }

  std::uint32_t alloc_clause(std::span<const Lit> lits, bool learnt);
  void attach(std::uint32_t cref);
  void free_clause(std::uint32_t cref);
  void enqueue(Lit l, std::uint32_t reason);
  std::uint32_t propagate();
  std::uint32_t propagate_budget();
  void explain(std::uint32_t reason_or_conflict, int implied_var, bool is_conflict, std::vector<Lit>& out);
  void analyze(std::uint32_t confl, std::vector<Lit>& learnt, int& bt_level);
  bool redundant(Lit l);
  void cancel_until(int lvl);
  Lit pick_branch();
  void reduce_db();
  void compact_arena();
  bool locked(std::uint32_t cref);

  void bump_var(int v);
  void bump_clause(std::uint32_t cref);
  void heap_insert(int v);
  void heap_up(std::size_t pos);
  void heap_down(std::size_t pos);
  int heap_pop();
  bool heap_contains(int v) const { return heap_index_[static_cast<std::size_t>(v)] >= 0; }

  bool ok_ = true;
  std::vector<std::uint8_t> assigns_;
  std::vector<int> level_;
  std::vector<std::uint32_t> reason_;
  std::vector<std::uint32_t> trail_pos_;
  std::vector<bool> phase_;
  std::vector<double> activity_;
  std::vector<char> seen_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;

  std::vector<Lit> arena_;
  std::size_t wasted_ = 0;
  std::vector<ClauseInfo> clauses_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<std::uint32_t> learnts_;
  std::vector<std::vector<Watcher>> watches_;

  std::vector<int> heap_;
  std::vector<int> heap_index_;
  double var_inc_ = 1.0;
  double clause_inc_ = 1.0;
  double max_learnts_ = 0.0;

  bool has_budget_ = false;
  std::vector<Lit> budget_lits_;            // sorted by weight, heaviest first
  std::vector<std::uint64_t> budget_w_;
  std::vector<std::int32_t> budget_index_;  // lit code -> position, -1 if none
  std::uint64_t budget_sum_ = 0;
  std::uint64_t bound_ = 0;

  std::vector<bool> model_;
  Stats stats_;
  std::vector<Lit> scratch_;
  std::vector<Lit> analyze_stack_;
};

}  // namespace treeclust::sat
