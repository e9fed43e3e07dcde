#pragma once

#include "treeclust/encoding.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace treeclust {

enum class SolveStatus { OPTIMAL, SATISFIABLE, INFEASIBLE, UNKNOWN };

std::string to_string(SolveStatus s);
inline bool is_feasible(SolveStatus s) { return s == SolveStatus::OPTIMAL || s == SolveStatus::SATISFIABLE; }

struct SolveResult {
  SolveStatus status = SolveStatus::UNKNOWN;
  /// model[v - 1] is the value of variable v; present iff feasible.
  std::optional<std::vector<bool>> model;
  /// Total weight of falsified soft clauses under `model`.
  std::optional<std::uint64_t> cost;
  double wall_time = 0.0;
};

inline constexpr double kDefaultTimeLimit = 1800.0;

/// Sum of weights of soft clauses falsified by `model` (indexed as in SolveResult).
std::uint64_t soft_cost(const WcnfFormula& f, const std::vector<bool>& model);
/// Index of the first hard clause falsified by `model`, if any.
std::optional<std::size_t> first_violated_hard(const WcnfFormula& f, const std::vector<bool>& model);

struct BuiltinOptions {
  double time_limit = kDefaultTimeLimit;
  /// Called on every improving model, cost strictly decreasing.
  std::function<void(std::uint64_t cost, const std::vector<bool>& model)> on_improve;
};

/// CDCL plus linear search on the cost bound.
SolveResult solve_builtin(const WcnfFormula& f, const BuiltinOptions& opts = {});

/// What an external solver printed, before mapping to a SolveResult.
struct SolverOutput {
  std::optional<std::string> status_line;  // text after "s "
  std::optional<std::uint64_t> last_cost;  // last "o" line
  std::optional<std::vector<bool>> model;
};

/// Parses "s"/"o"/"v" lines. "v" lines may hold literal lists (possibly split
/// across several lines) or one 0/1 string. Unmentioned variables are false.
/// Throws SolverError on malformed lines.
SolverOutput parse_solver_output(const std::string& text, int n_vars);

/// Runs `/bin/sh -c "<cmd> <wcnf-path>"` with a wall-clock limit.
/// Throws SolverError if the command is missing or its output is unusable.
SolveResult solve_external(const WcnfFormula& f, const std::string& solver_cmd, double time_limit = kDefaultTimeLimit);

/// "builtin" or a shell command prefix for solve_external.
struct SolverBackend {
  std::string command = "builtin";

  bool is_builtin() const { return command == "builtin"; }
  /// Explicit choice, else $TREECLUST_SOLVER, else builtin.
  static SolverBackend resolve(const std::optional<std::string>& explicit_cmd = std::nullopt);
};

SolveResult solve(const WcnfFormula& f, const SolverBackend& backend, double time_limit = kDefaultTimeLimit);

}  // namespace treeclust
