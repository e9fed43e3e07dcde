#include "treeclust/solver.hpp"

#include "treeclust/error.hpp"
#include "treeclust/sat.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <fcntl.h>
#include <sys/wait.h>
#include <unistd.h>

namespace treeclust {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool lit_true(const std::vector<bool>& model, int lit) {
  const bool v = model[static_cast<std::size_t>((lit > 0 ? lit : -lit) - 1)];
  return lit > 0 ? v : !v;
}

bool clause_true(const std::vector<bool>& model, std::span<const int> c) {
  return std::any_of(c.begin(), c.end(), [&](int l) { return lit_true(model, l); });
}

// Rejects a model that breaks a hard clause and fills in the recounted cost.
void finalize(const WcnfFormula& f, SolveResult& r) {
  if (!r.model) return;
  if (r.model->size() != static_cast<std::size_t>(f.n_vars))
    throw SolverError("model has " + std::to_string(r.model->size()) + " values, expected " + std::to_string(f.n_vars));
  if (auto bad = first_violated_hard(f, *r.model))
    throw SolverError("solver model violates hard clause #" + std::to_string(*bad));
  r.cost = soft_cost(f, *r.model);
}

}  // namespace

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL: return "OPTIMAL";
    case SolveStatus::SATISFIABLE: return "SATISFIABLE";
    case SolveStatus::INFEASIBLE: return "INFEASIBLE";
    case SolveStatus::UNKNOWN: return "UNKNOWN";
  }
  return "UNKNOWN";
}

std::uint64_t soft_cost(const WcnfFormula& f, const std::vector<bool>& model) {
  std::uint64_t cost = 0;
  for (std::size_t c = 0; c < f.soft.size(); ++c)
    if (!clause_true(model, f.soft[c])) cost += f.soft_weight[c];
  return cost;
}

std::optional<std::size_t> first_violated_hard(const WcnfFormula& f, const std::vector<bool>& model) {
  for (std::size_t c = 0; c < f.hard.size(); ++c)
    if (!clause_true(model, f.hard[c])) return c;
  return std::nullopt;
}

SolveResult solve_builtin(const WcnfFormula& f, const BuiltinOptions& opts) {
  const auto t0 = Clock::now();
  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opts.time_limit));
  SolveResult result;

  sat::Solver s;
  for (int v = 0; v < f.n_vars; ++v) s.new_var();

  std::vector<sat::Lit> buf;
  auto to_lits = [&](std::span<const int> c) {
    buf.clear();
    for (int l : c) buf.push_back(sat::Lit::from_dimacs(l));
  };
  bool ok = true;
  for (std::size_t c = 0; c < f.hard.size() && ok; ++c) {
    to_lits(f.hard[c]);
    ok = s.add_clause(buf);
  }

  // Each soft clause gets a "violated" literal; unit softs use their own
  // negation, longer ones a fresh relaxation variable.
  std::map<std::uint32_t, std::uint64_t> penalty;
  std::uint64_t always_violated = 0;
  for (std::size_t c = 0; c < f.soft.size() && ok; ++c) {
    const auto clause = f.soft[c];
    const std::uint64_t w = f.soft_weight[c];
    if (clause.empty()) {
      always_violated += w;
      continue;
    }
    if (clause.size() == 1) {
      const sat::Lit l = sat::Lit::from_dimacs(clause[0]);
      s.set_phase(l.var(), !l.negated());
      penalty[(~l).code] += w;
      continue;
    }
    const int r = s.new_var();
    to_lits(clause);
    buf.push_back(sat::Lit::make(r, false));
    ok = s.add_clause(buf);
    penalty[sat::Lit::make(r, false).code] += w;
  }

  if (!ok) {
    result.status = SolveStatus::INFEASIBLE;
    result.wall_time = seconds_since(t0);
    return result;
  }

  std::vector<sat::Lit> blits;
  std::vector<std::uint64_t> bweights;
  std::uint64_t total = 0;
  for (const auto& [code, w] : penalty) {
    blits.push_back(sat::Lit{code});
    bweights.push_back(w);
    total += w;
  }
  s.set_budget(std::move(blits), std::move(bweights), total);

  std::optional<std::vector<bool>> best;
  std::uint64_t best_cost = 0;
  for (;;) {
    const sat::Result r = s.solve(deadline);
    if (r == sat::Result::Sat) {
      std::vector<bool> m(s.model().begin(), s.model().begin() + f.n_vars);
      const std::uint64_t cost = soft_cost(f, m);
      if (!best || cost < best_cost) {
        best = std::move(m);
        best_cost = cost;
        if (opts.on_improve) opts.on_improve(best_cost, *best);
      }
      if (best_cost == always_violated) {
        result.status = SolveStatus::OPTIMAL;
        break;
      }
      s.tighten_budget(best_cost - always_violated - 1);
      continue;
    }
    if (r == sat::Result::Unsat)
      result.status = best ? SolveStatus::OPTIMAL : SolveStatus::INFEASIBLE;
    else
      result.status = best ? SolveStatus::SATISFIABLE : SolveStatus::UNKNOWN;
    break;
  }
  result.model = std::move(best);
  finalize(f, result);
  result.wall_time = seconds_since(t0);
  return result;
}

SolverOutput parse_solver_output(const std::string& text, int n_vars) {
  SolverOutput out;
  std::vector<bool> model(static_cast<std::size_t>(n_vars), false);
  bool have_model = false;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw SolverError("solver output line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() < 1) continue;
    const char tag = line[0];
    if (line.size() > 1 && line[1] != ' ' && line[1] != '\t') continue;
    const std::string rest = line.size() > 2 ? line.substr(2) : std::string{};
    if (tag == 's') {
      const auto b = rest.find_first_not_of(" \t");
      const auto e = rest.find_last_not_of(" \t");
      if (b == std::string::npos) fail("empty status line");
      out.status_line = rest.substr(b, e - b + 1);
    } else if (tag == 'o') {
      std::istringstream ss(rest);
      long long cost = -1;
      if (!(ss >> cost) || cost < 0) fail("bad cost line");
      out.last_cost = static_cast<std::uint64_t>(cost);
    } else if (tag == 'v') {
      std::istringstream ss(rest);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (tokens.size() == 1 && tokens[0].size() == static_cast<std::size_t>(n_vars) && n_vars > 1 &&
          tokens[0].find_first_not_of("01") == std::string::npos) {
        for (std::size_t v = 0; v < tokens[0].size(); ++v) model[v] = tokens[0][v] == '1';
        have_model = true;
        continue;
      }
      for (const auto& t : tokens) {
        long long lit = 0;
        try {
          std::size_t used = 0;
          lit = std::stoll(t, &used);
          if (used != t.size()) fail("bad literal '" + t + "'");
        } catch (const std::logic_error&) {
          fail("bad literal '" + t + "'");
        }
        if (lit == 0) continue;
        const long long v = lit > 0 ? lit : -lit;
        if (v > n_vars) fail("literal " + t + " exceeds variable count");
        model[static_cast<std::size_t>(v - 1)] = lit > 0;
      }
      have_model = true;
    }
  }
  if (have_model) out.model = std::move(model);
  return out;
}

SolveResult solve_external(const WcnfFormula& f, const std::string& solver_cmd, double time_limit) {
  const auto t0 = Clock::now();
  const char* tmpdir = std::getenv("TMPDIR");
  std::string base = std::string(tmpdir && *tmpdir ? tmpdir : "/tmp") + "/treeclust-XXXXXX";

  std::vector<char> wpath(base.begin(), base.end());
  wpath.push_back('\0');
  const int wfd = ::mkstemp(wpath.data());
  if (wfd < 0) throw SolverError(std::string("cannot create temp file: ") + std::strerror(errno));
  ::close(wfd);
  std::vector<char> opath(base.begin(), base.end());
  opath.push_back('\0');
  const int ofd = ::mkstemp(opath.data());
  if (ofd < 0) {
    ::unlink(wpath.data());
    throw SolverError(std::string("cannot create temp file: ") + std::strerror(errno));
  }
  struct Cleanup {
    const char* a;
    const char* b;
    ~Cleanup() {
      ::unlink(a);
      ::unlink(b);
    }
  } cleanup{wpath.data(), opath.data()};

  write_wcnf(f, std::filesystem::path(wpath.data()));
  const std::string command = solver_cmd + " " + wpath.data();

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(ofd);
    throw SolverError(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(ofd, STDOUT_FILENO);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, STDERR_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(ofd);
  ::setpgid(pid, pid);

  const auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(time_limit));
  int wstatus = 0;
  bool timed_out = false;
  bool terminated = false;
  Clock::time_point kill_at{};
  for (;;) {
    const pid_t r = ::waitpid(pid, &wstatus, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) throw SolverError(std::string("waitpid failed: ") + std::strerror(errno));
    const auto now = Clock::now();
    if (!terminated && now >= deadline) {
      // Anytime solvers print their best model on SIGTERM.
      ::kill(-pid, SIGTERM);
      terminated = timed_out = true;
      kill_at = now + std::chrono::seconds(5);
    } else if (terminated && now >= kill_at) {
      ::kill(-pid, SIGKILL);
      kill_at = now + std::chrono::hours(1);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  std::ifstream in(opath.data(), std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();

  if (!timed_out && WIFEXITED(wstatus) && WEXITSTATUS(wstatus) == 127 && text.str().empty())
    throw SolverError("solver command not found: " + solver_cmd);

  SolverOutput out = parse_solver_output(text.str(), f.n_vars);
  SolveResult result;
  const std::string st = out.status_line.value_or("");
  if (st == "UNSATISFIABLE") {
    result.status = SolveStatus::INFEASIBLE;
  } else if (st == "OPTIMUM FOUND") {
    if (!out.model) throw SolverError("solver reported an optimum without a model");
    result.status = SolveStatus::OPTIMAL;
  } else if (out.model && (st == "SATISFIABLE" || timed_out || st.empty())) {
    result.status = SolveStatus::SATISFIABLE;
  } else if (timed_out || st == "UNKNOWN" || st == "SATISFIABLE") {
    result.status = SolveStatus::UNKNOWN;
  } else {
    throw SolverError("unusable solver output (status '" + st + "') from: " + solver_cmd);
  }
  if (is_feasible(result.status)) result.model = std::move(out.model);
  finalize(f, result);
  result.wall_time = seconds_since(t0);
  return result;
}

SolverBackend SolverBackend::resolve(const std::optional<std::string>& explicit_cmd) {
  if (explicit_cmd && !explicit_cmd->empty()) return {*explicit_cmd};
  if (const char* env = std::getenv("TREECLUST_SOLVER"); env && *env) return {env};
  return {};
}

SolveResult solve(const WcnfFormula& f, const SolverBackend& backend, double time_limit) {
  if (backend.is_builtin()) {
    BuiltinOptions opts;
    opts.time_limit = time_limit;
    return solve_builtin(f, opts);
  }
  return solve_external(f, backend.command, time_limit);
}

}  // namespace treeclust
