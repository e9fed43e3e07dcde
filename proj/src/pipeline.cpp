#include "treeclust/pipeline.hpp"

#include "treeclust/error.hpp"

namespace treeclust {

PreparedInstance prepare_instance(const Dataset& d, const PairTable& pt, const ConstraintSet& cs,
                                  const ProblemConfig& cfg) {
  if (cfg.k < 2) throw ConfigError("k must be at least 2");
  if (d.size() < static_cast<std::size_t>(cfg.k)) throw ConfigError("dataset has fewer points than clusters");
  if (cfg.mode == ClusteringMode::Tree && (cfg.depth < 1 || cfg.depth > 20 || (1 << cfg.depth) < cfg.k))
    throw ConfigError("a tree of depth " + std::to_string(cfg.depth) + " cannot hold " + std::to_string(cfg.k) +
                      " clusters");

  PreparedInstance inst;
  inst.classes = build_distance_classes(pt, cfg.epsilon);
  inst.pruning = cfg.smart_pairs ? smart_pairs(pt, inst.classes, cs) : bypass_pairs(pt, inst.classes, cs);
  if (inst.pruning.infeasible) return inst;

  EncodeOptions opts;
  opts.objective = cfg.objective;
  opts.min_nonempty = cfg.min_nonempty;
  if (cfg.mode == ClusteringMode::Tree)
    inst.encoding = encode_tree(d, TreeShape(cfg.depth), cfg.k, pt, inst.classes, inst.pruning, opts);
  else
    inst.encoding = encode_cc(d, cfg.k, pt, inst.classes, inst.pruning, opts);
  return inst;
}

ClusteringRun solve_clustering(const Dataset& d, const PairTable& pt, const ConstraintSet& cs,
                               const ProblemConfig& cfg, const SolverBackend& backend, double time_limit) {
  PreparedInstance inst = prepare_instance(d, pt, cs, cfg);
  ClusteringRun run;
  run.num_classes = inst.classes.size();
  if (!inst.encoding) {
    run.pruned_infeasible = true;
    run.solve.status = SolveStatus::INFEASIBLE;
    return run;
  }
  const Encoding& enc = *inst.encoding;
  run.num_vars = static_cast<std::size_t>(enc.formula.n_vars);
  run.num_hard = enc.formula.hard.size();
  run.num_soft = enc.formula.soft.size();
  run.solve = solve(enc.formula, backend, time_limit);
  if (run.solve.model) {
    run.solution = decode(*run.solve.model, enc.layout, d, pt, run.solve.status, cfg.min_nonempty);
    run.report = verify(*run.solution, d, cs, inst.classes);
  }
  return run;
}

}  // namespace treeclust
