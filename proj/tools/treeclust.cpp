#include "treeclust/data.hpp"
#include "treeclust/decode.hpp"
#include "treeclust/encoding.hpp"
#include "treeclust/error.hpp"
#include "treeclust/harness.hpp"
#include "treeclust/metrics.hpp"
#include "treeclust/oracle.hpp"
#include "treeclust/pipeline.hpp"
#include "treeclust/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <set>

using namespace treeclust;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInfeasible = 2, kUnknown = 3, kConfig = 4 };

struct Common {
  std::string dataset;
  std::string label_column;
  std::string mode = "tree";
  std::string objective = "MD_MS";
  int depth = 3;
  int k = 0;
  double epsilon = 0.1;
  double kappa = 0.0;
  double time_limit = kDefaultTimeLimit;
  std::string solver;
  bool no_smart_pairs = false;
};

void add_problem_flags(CLI::App* app, Common& c) {
  app->add_option("--dataset", c.dataset, "CSV file with a header row")->required();
  app->add_option("--label-column", c.label_column, "ground-truth column (default: last)");
  app->add_option("--mode", c.mode, "tree or cc")->capture_default_str();
  app->add_option("--objective", c.objective, "MD or MD_MS")->capture_default_str();
  app->add_option("--depth", c.depth, "tree depth")->capture_default_str();
  app->add_option("--k", c.k, "number of clusters (default: ground-truth classes)");
  app->add_option("--epsilon", c.epsilon, "distance-class width; 'inf' for a single class")->capture_default_str();
  app->add_option("--kappa", c.kappa, "constraints per point")->capture_default_str();
  app->add_option("--time-limit", c.time_limit, "solver wall-clock limit in seconds")->capture_default_str();
  app->add_option("--solver", c.solver, "'builtin' or an external MaxSAT command (default: $TREECLUST_SOLVER or builtin)");
  app->add_flag("--no-smart-pairs", c.no_smart_pairs, "emit every pair clause");
}

Dataset load(const Common& c) {
  LoadOptions lo;
  if (!c.label_column.empty()) lo.label_column = c.label_column;
  return load_dataset(c.dataset, lo);
}

int resolve_k(const Common& c, const Dataset& d) {
  if (c.k > 0) return c.k;
  if (!d.labels) throw ConfigError("--k is required for datasets without labels");
  return static_cast<int>(std::set<int>(d.labels->begin(), d.labels->end()).size());
}

ProblemConfig problem(const Common& c, const Dataset& d) {
  ProblemConfig p;
  p.mode = parse_mode(c.mode);
  p.objective = parse_objective(c.objective);
  p.depth = c.depth;
  p.k = resolve_k(c, d);
  p.epsilon = c.epsilon;
  p.smart_pairs = !c.no_smart_pairs;
  return p;
}

ConstraintSet constraints(const Dataset& d, const std::string& file, double kappa, std::uint64_t seed) {
  if (!file.empty()) return read_constraints(file, d.size());
  if (kappa == 0.0) return {};
  return generate_constraints(d, kappa, seed);
}

int run_solve(const Common& c, std::uint64_t seed, const std::string& cfile, const std::string& wcnf_out,
              const std::string& out) {
  const Dataset d = load(c);
  const ProblemConfig pc = problem(c, d);
  const ConstraintSet cs = constraints(d, cfile, c.kappa, seed);
  const PairTable pt = pair_table(d);

  if (!wcnf_out.empty()) {
    const PreparedInstance inst = prepare_instance(d, pt, cs, pc);
    if (inst.encoding) write_wcnf(inst.encoding->formula, std::filesystem::path(wcnf_out));
  }
  const ClusteringRun run = solve_clustering(d, pt, cs, pc, SolverBackend::resolve(c.solver.empty() ? std::nullopt : std::optional(c.solver)), c.time_limit);

  std::cout << "status: " << to_string(run.solve.status) << "\n";
  std::cout << "constraints: " << cs.ml.size() << " ML, " << cs.cl.size() << " CL\n";
  std::cout << "clauses: " << run.num_clauses() << " (" << run.num_hard << " hard), variables: " << run.num_vars
            << ", distance classes: " << run.num_classes << "\n";
  std::cout << "time: " << run.solve.wall_time << " s\n";

  nlohmann::ordered_json j;
  j["status"] = to_string(run.solve.status);
  j["clauses"] = run.num_clauses();
  j["variables"] = run.num_vars;
  j["wall_time"] = run.solve.wall_time;
  if (run.solution) {
    const auto& sol = *run.solution;
    std::cout << "lambda+: " << sol.lambda_plus << ", lambda-: " << sol.lambda_minus << "\n";
    std::cout << "md: " << sol.md << ", ms: " << format_number(sol.ms) << "\n";
    j["lambda_plus"] = sol.lambda_plus;
    j["lambda_minus"] = sol.lambda_minus;
    j["md"] = sol.md;
    j["ms"] = std::isfinite(sol.ms) ? nlohmann::ordered_json(sol.ms) : nlohmann::ordered_json(nullptr);
    j["labels"] = sol.labels;
    if (d.labels) {
      const double ari = adjusted_rand_index(sol.labels, *d.labels);
      const double nmi = normalized_mutual_info(sol.labels, *d.labels);
      std::cout << "ari: " << ari << ", nmi: " << nmi << "\n";
      j["ari"] = ari;
      j["nmi"] = nmi;
    }
    if (sol.tree) {
      std::cout << tree_to_text(*sol.tree, d.feature_names);
      j["tree"] = nlohmann::ordered_json::parse(tree_to_json(*sol.tree, d.feature_names));
    }
    if (!run.report->ok()) {
      std::cerr << "verification failed:\n" << run.report->summary();
      return kFailure;
    }
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    f << j.dump(2) << "\n";
  }
  switch (run.solve.status) {
    case SolveStatus::OPTIMAL:
    case SolveStatus::SATISFIABLE: return kOk;
    case SolveStatus::INFEASIBLE: return kInfeasible;
    case SolveStatus::UNKNOWN: return kUnknown;
  }
  return kFailure;
}

int run_encode(const Common& c, std::uint64_t seed, const std::string& cfile, const std::string& wcnf_out) {
  const Dataset d = load(c);
  const ProblemConfig pc = problem(c, d);
  const ConstraintSet cs = constraints(d, cfile, c.kappa, seed);
  const PairTable pt = pair_table(d);
  const PreparedInstance inst = prepare_instance(d, pt, cs, pc);
  if (!inst.encoding) {
    std::cerr << "constraints are inconsistent; no formula written\n";
    return kInfeasible;
  }
  const auto& f = inst.encoding->formula;
  if (wcnf_out.empty() || wcnf_out == "-") {
    write_wcnf(f, std::cout);
  } else {
    write_wcnf(f, std::filesystem::path(wcnf_out));
    std::ofstream map(wcnf_out + ".map.json");
    map << inst.encoding->layout.to_json() << "\n";
    std::cerr << "wrote " << wcnf_out << ": " << f.n_vars << " variables, " << f.hard.size() << " hard, "
              << f.soft.size() << " soft clauses\n";
    for (std::size_t fam = 0; fam < static_cast<std::size_t>(ClauseFamily::kCount); ++fam) {
      const auto n = f.count(static_cast<ClauseFamily>(fam));
      if (n) std::cerr << "  " << family_name(static_cast<ClauseFamily>(fam)) << ": " << n << "\n";
    }
  }
  return kOk;
}

int run_oracle(const Common& c, std::uint64_t seed, const std::string& cfile) {
  const Dataset d = load(c);
  const int k = resolve_k(c, d);
  const ConstraintSet cs = constraints(d, cfile, c.kappa, seed);
  const OracleResult r = parse_mode(c.mode) == ClusteringMode::Tree ? tree_oracle(d, c.depth, k, cs) : cc_oracle(d, k, cs);
  if (!r.feasible) {
    std::cout << "infeasible\n";
    return kInfeasible;
  }
  std::cout << "min md: " << r.min_md << " (" << r.optimal_labelings.size() << " optimal labelings, "
            << r.num_feasible << " feasible)\n";
  std::cout << "pareto front (ms, md):\n";
  for (const auto& p : r.front) std::cout << "  " << format_number(p.ms) << ", " << p.md << "\n";
  return kOk;
}

int run_sweep(const Common& c, const std::vector<std::string>& datasets, const std::vector<double>& kappas,
              const std::vector<int>& depths, std::size_t n_seeds, const std::string& out, unsigned jobs) {
  std::vector<RunConfig> cells;
  for (const auto& ds : datasets)
    for (int depth : depths)
      for (double kappa : kappas) {
        RunConfig rc;
        rc.dataset = ds;
        if (!c.label_column.empty()) rc.label_column = c.label_column;
        rc.mode = parse_mode(c.mode);
        rc.objective = parse_objective(c.objective);
        rc.depth = depth;
        rc.k = c.k;
        rc.epsilon = c.epsilon;
        rc.kappa = kappa;
        rc.seeds = RunConfig::default_seeds(n_seeds);
        rc.time_limit = c.time_limit;
        rc.smart_pairs = !c.no_smart_pairs;
        rc.backend = SolverBackend::resolve(c.solver.empty() ? std::nullopt : std::optional(c.solver));
        cells.push_back(std::move(rc));
      }
  MatrixOptions mo;
  mo.out_dir = out;
  mo.jobs = jobs;
  mo.quiet = false;
  const auto records = run_matrix(cells, mo);
  std::cout << summary_table(records);
  for (const auto& r : records)
    if (r.error) return kFailure;
  return kOk;
}

int run_maxsat(const std::string& path, const std::string& solver, double time_limit) {
  const WcnfFormula f = read_wcnf(std::filesystem::path(path));
  const SolveResult r = solve(f, SolverBackend::resolve(solver.empty() ? std::optional<std::string>("builtin") : std::optional(solver)), time_limit);
  if (r.cost) std::cout << "o " << *r.cost << "\n";
  switch (r.status) {
    case SolveStatus::OPTIMAL: std::cout << "s OPTIMUM FOUND\n"; break;
    case SolveStatus::SATISFIABLE: std::cout << "s SATISFIABLE\n"; break;
    case SolveStatus::INFEASIBLE: std::cout << "s UNSATISFIABLE\n"; break;
    case SolveStatus::UNKNOWN: std::cout << "s UNKNOWN\n"; break;
  }
  if (r.model) {
    std::cout << "v";
    for (std::size_t v = 0; v < r.model->size(); ++v) std::cout << ' ' << ((*r.model)[v] ? "" : "-") << (v + 1);
    std::cout << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretable constrained clustering via MaxSAT"};
  app.require_subcommand(1);

  Common c;
  std::uint64_t seed = 1;
  std::string cfile, wcnf_out, out;

  auto* solve_cmd = app.add_subcommand("solve", "cluster one dataset and print the tree");
  add_problem_flags(solve_cmd, c);
  solve_cmd->add_option("--seed", seed, "constraint sampling seed")->capture_default_str();
  solve_cmd->add_option("--constraints", cfile, "constraint file (ML i j / CL i j) instead of sampling");
  solve_cmd->add_option("--emit-wcnf", wcnf_out, "also write the formula to this path");
  solve_cmd->add_option("--out", out, "write the solution as JSON");

  auto* encode_cmd = app.add_subcommand("encode", "write the WCNF formula (and a variable map) without solving");
  add_problem_flags(encode_cmd, c);
  encode_cmd->add_option("--seed", seed, "constraint sampling seed")->capture_default_str();
  encode_cmd->add_option("--constraints", cfile, "constraint file instead of sampling");
  encode_cmd->add_option("--emit-wcnf,--out", wcnf_out, "output path ('-' for stdout)");

  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force reference optimum for tiny instances");
  add_problem_flags(oracle_cmd, c);
  oracle_cmd->add_option("--seed", seed, "constraint sampling seed")->capture_default_str();
  oracle_cmd->add_option("--constraints", cfile, "constraint file instead of sampling");
  oracle_cmd->group("");

  std::vector<std::string> datasets;
  std::vector<double> kappas{0.0};
  std::vector<int> depths;
  std::size_t n_seeds = 20;
  unsigned jobs = 1;
  std::string sweep_out = "runs";
  auto* sweep_cmd = app.add_subcommand("sweep", "run seeds x kappa x depth cells and write reports");
  sweep_cmd->add_option("--dataset", datasets, "one or more CSV files")->required();
  sweep_cmd->add_option("--label-column", c.label_column, "ground-truth column (default: last)");
  sweep_cmd->add_option("--mode", c.mode, "tree or cc")->capture_default_str();
  sweep_cmd->add_option("--objective", c.objective, "MD or MD_MS")->capture_default_str();
  sweep_cmd->add_option("--depth", depths, "one or more depths (default 3)");
  sweep_cmd->add_option("--k", c.k, "number of clusters (default: ground-truth classes)");
  sweep_cmd->add_option("--epsilon", c.epsilon, "distance-class width")->capture_default_str();
  sweep_cmd->add_option("--kappa", kappas, "one or more kappa values")->capture_default_str();
  sweep_cmd->add_option("--seeds", n_seeds, "constraint sets per cell (seeds 1..N)")->capture_default_str();
  sweep_cmd->add_option("--time-limit", c.time_limit, "per-run limit in seconds")->capture_default_str();
  sweep_cmd->add_option("--solver", c.solver, "'builtin' or an external MaxSAT command");
  sweep_cmd->add_flag("--no-smart-pairs", c.no_smart_pairs, "emit every pair clause");
  sweep_cmd->add_option("--out", sweep_out, "results directory")->capture_default_str();
  sweep_cmd->add_option("--jobs", jobs, "parallel cells")->capture_default_str();

  std::string wcnf_in, maxsat_solver;
  auto* maxsat_cmd = app.add_subcommand("maxsat", "solve a WCNF file and print s/o/v lines");
  maxsat_cmd->add_option("wcnf", wcnf_in, "input formula")->required();
  maxsat_cmd->add_option("--solver", maxsat_solver, "backend (default builtin)");
  maxsat_cmd->add_option("--time-limit", c.time_limit, "seconds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (depths.empty()) depths.push_back(3);
    if (*solve_cmd) return run_solve(c, seed, cfile, wcnf_out, out);
    if (*encode_cmd) return run_encode(c, seed, cfile, wcnf_out);
    if (*oracle_cmd) return run_oracle(c, seed, cfile);
    if (*sweep_cmd) return run_sweep(c, datasets, kappas, depths, n_seeds, sweep_out, jobs);
    if (*maxsat_cmd) return run_maxsat(wcnf_in, maxsat_solver, c.time_limit);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
