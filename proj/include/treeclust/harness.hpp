#pragma once

#include "treeclust/encoding.hpp"
#include "treeclust/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace treeclust {

struct RunConfig {
  std::filesystem::path dataset;
  std::optional<std::string> label_column;
  ClusteringMode mode = ClusteringMode::Tree;
  Objective objective = Objective::MD_MS;
  int depth = 3;
  int k = 0;  // 0: number of ground-truth classes
  double epsilon = 0.1;
  double kappa = 0.0;
  std::vector<std::uint64_t> seeds = default_seeds();
  double time_limit = kDefaultTimeLimit;
  bool smart_pairs = true;
  SolverBackend backend;

  static std::vector<std::uint64_t> default_seeds(std::size_t n = 20);
  std::string dataset_name() const { return dataset.stem().string(); }
  /// runs/<dataset>/<mode>/<objective>/d<d>_k<k>_eps<eps>_kappa<kappa>[_nosp]
  std::filesystem::path cell_dir(int resolved_k) const;
};

struct SeedRecord {
  std::uint64_t seed = 0;
  SolveStatus status = SolveStatus::UNKNOWN;
  std::optional<double> ari, nmi;
  double wall_time = 0.0;
  std::size_t clauses = 0;
  std::size_t num_ml = 0, num_cl = 0;
  std::optional<std::size_t> lambda_plus, lambda_minus;
  std::optional<double> ms, md;
};

struct RunRecord {
  RunConfig config;
  int k = 0;
  std::vector<SeedRecord> seeds;
  std::optional<std::string> error;  // set when the cell failed as a whole

  std::size_t feasible() const;
  /// Means over feasible seeds only; absent with no feasible seed.
  std::optional<double> mean_ari() const;
  std::optional<double> mean_nmi() const;
  double mean_time() const;
  double mean_clauses() const;
};

/// Runs one cell over all its seeds. Throws on configuration errors, backend
/// errors and on any solution that fails verification. Writes one JSON per
/// seed below `results_root` when given.
RunRecord run_cell(const RunConfig& cfg, const std::optional<std::filesystem::path>& results_root = std::nullopt);

struct MatrixOptions {
  std::filesystem::path out_dir = "runs";
  unsigned jobs = 1;
  bool quiet = true;
};

/// Runs all cells on a bounded worker pool. A failing cell is recorded with
/// its error and the rest continue. Writes summary.csv, summary.json,
/// table.txt and figure1.csv into out_dir.
std::vector<RunRecord> run_matrix(const std::vector<RunConfig>& cfgs, const MatrixOptions& opts = {});

std::string summary_csv(const std::vector<RunRecord>& records);
std::string summary_json(const std::vector<RunRecord>& records);
std::string summary_table(const std::vector<RunRecord>& records);
/// Mean ARI and feasibility percentage per (mode, objective, kappa) across datasets.
std::string figure1_csv(const std::vector<RunRecord>& records);

/// Shortest round-trip decimal ("0.1", "inf").
std::string format_number(double v);

}  // namespace treeclust
