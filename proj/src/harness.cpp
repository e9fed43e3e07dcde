#include "treeclust/harness.hpp"

#include "treeclust/data.hpp"
#include "treeclust/decode.hpp"
#include "treeclust/error.hpp"
#include "treeclust/metrics.hpp"
#include "treeclust/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace treeclust {

namespace {

using json = nlohmann::ordered_json;

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << s;
}

std::string opt_num(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

int resolve_k(const RunConfig& cfg, const Dataset& d) {
  if (cfg.k > 0) return cfg.k;
  if (!d.labels) throw ConfigError("k not given and the dataset has no labels to infer it from");
  return static_cast<int>(std::set<int>(d.labels->begin(), d.labels->end()).size());
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::vector<std::uint64_t> RunConfig::default_seeds(std::size_t n) {
  std::vector<std::uint64_t> s(n);
  std::iota(s.begin(), s.end(), std::uint64_t{1});
  return s;
}

std::filesystem::path RunConfig::cell_dir(int resolved_k) const {
  std::string cell = "d" + std::to_string(depth) + "_k" + std::to_string(resolved_k) + "_eps" + format_number(epsilon) +
                     "_kappa" + format_number(kappa);
  if (!smart_pairs) cell += "_nosp";
  return std::filesystem::path(dataset_name()) / to_string(mode) / to_string(objective) / cell;
}

std::size_t RunRecord::feasible() const {
  return static_cast<std::size_t>(
      std::count_if(seeds.begin(), seeds.end(), [](const SeedRecord& s) { return is_feasible(s.status); }));
}

std::optional<double> RunRecord::mean_ari() const {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : seeds)
    if (is_feasible(s.status) && s.ari) {
      sum += *s.ari;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> RunRecord::mean_nmi() const {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& s : seeds)
    if (is_feasible(s.status) && s.nmi) {
      sum += *s.nmi;
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

double RunRecord::mean_time() const {
  if (seeds.empty()) return 0.0;
  double sum = 0;
  for (const auto& s : seeds) sum += s.wall_time;
  return sum / static_cast<double>(seeds.size());
}

double RunRecord::mean_clauses() const {
  if (seeds.empty()) return 0.0;
  double sum = 0;
  for (const auto& s : seeds) sum += static_cast<double>(s.clauses);
  return sum / static_cast<double>(seeds.size());
}

RunRecord run_cell(const RunConfig& cfg, const std::optional<std::filesystem::path>& results_root) {
  LoadOptions lo;
  lo.label_column = cfg.label_column;
  const Dataset d = load_dataset(cfg.dataset, lo);
  if (!d.labels) throw ConfigError("harness runs need ground-truth labels");
  const PairTable pt = pair_table(d);

  RunRecord rec;
  rec.config = cfg;
  rec.k = resolve_k(cfg, d);
  std::set<std::uint64_t> distinct(cfg.seeds.begin(), cfg.seeds.end());
  if (distinct.size() != cfg.seeds.size()) throw ConfigError("seeds must be distinct");

  ProblemConfig pc;
  pc.mode = cfg.mode;
  pc.objective = cfg.objective;
  pc.depth = cfg.depth;
  pc.k = rec.k;
  pc.epsilon = cfg.epsilon;
  pc.smart_pairs = cfg.smart_pairs;

  std::optional<std::filesystem::path> cell_dir;
  if (results_root) {
    cell_dir = *results_root / cfg.cell_dir(rec.k);
    std::filesystem::create_directories(*cell_dir);
  }

  for (std::uint64_t seed : cfg.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const ConstraintSet cs = generate_constraints(d, cfg.kappa, seed);
    const ClusteringRun run = solve_clustering(d, pt, cs, pc, cfg.backend, cfg.time_limit);

    SeedRecord sr;
    sr.seed = seed;
    sr.status = run.solve.status;
    sr.clauses = run.num_clauses();
    sr.num_ml = cs.ml.size();
    sr.num_cl = cs.cl.size();
    if (run.solution) {
      if (!run.report->ok())
        throw SolverError("verification failed for " + cfg.dataset_name() + " seed " + std::to_string(seed) + ":\n" +
                          run.report->summary());
      const auto& sol = *run.solution;
      sr.ari = adjusted_rand_index(sol.labels, *d.labels);
      sr.nmi = normalized_mutual_info(sol.labels, *d.labels);
      sr.lambda_plus = sol.lambda_plus;
      sr.lambda_minus = sol.lambda_minus;
      sr.ms = sol.ms;
      sr.md = sol.md;
    }
    sr.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (cell_dir) {
      json j;
      j["dataset"] = cfg.dataset_name();
      j["mode"] = to_string(cfg.mode);
      j["objective"] = to_string(cfg.objective);
      j["depth"] = cfg.depth;
      j["k"] = rec.k;
      j["epsilon"] = finite_or_null(cfg.epsilon);
      j["kappa"] = cfg.kappa;
      j["smart_pairs"] = cfg.smart_pairs;
      j["seed"] = seed;
      j["status"] = to_string(sr.status);
      j["ari"] = opt_json(sr.ari);
      j["nmi"] = opt_json(sr.nmi);
      j["wall_time"] = sr.wall_time;
      j["clauses"] = sr.clauses;
      j["variables"] = run.num_vars;
      j["distance_classes"] = run.num_classes;
      j["ml"] = sr.num_ml;
      j["cl"] = sr.num_cl;
      j["lambda_plus"] = opt_json(sr.lambda_plus);
      j["lambda_minus"] = opt_json(sr.lambda_minus);
      j["ms"] = sr.ms ? finite_or_null(*sr.ms) : json(nullptr);
      j["md"] = opt_json(sr.md);
      if (run.solution) {
        j["labels"] = run.solution->labels;
        if (run.solution->tree) j["tree"] = json::parse(tree_to_json(*run.solution->tree, d.feature_names));
        json checks = json::object();
        for (const auto& c : run.report->checks) checks[c.name] = c.passed;
        j["verify"] = std::move(checks);
      }
      write_text(*cell_dir / ("seed" + std::to_string(seed) + ".json"), j.dump(2) + "\n");
    }
    rec.seeds.push_back(sr);
  }
  return rec;
}

std::vector<RunRecord> run_matrix(const std::vector<RunConfig>& cfgs, const MatrixOptions& opts) {
  std::filesystem::create_directories(opts.out_dir);
  std::vector<RunRecord> records(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= cfgs.size()) return;
      try {
        records[c] = run_cell(cfgs[c], opts.out_dir);
      } catch (const std::exception& e) {
        records[c] = RunRecord{};
        records[c].config = cfgs[c];
        records[c].k = cfgs[c].k;
        records[c].error = e.what();
      }
      if (!opts.quiet) {
        std::lock_guard lock(log_mu);
        const auto& r = records[c];
        std::cerr << "[" << (c + 1) << "/" << cfgs.size() << "] " << cfgs[c].dataset_name() << " kappa "
                  << format_number(cfgs[c].kappa) << ": "
                  << (r.error ? "error: " + *r.error
                              : std::to_string(r.feasible()) + "/" + std::to_string(r.seeds.size()) + " feasible")
                  << "\n";
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(cfgs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text(opts.out_dir / "summary.csv", summary_csv(records));
  write_text(opts.out_dir / "summary.json", summary_json(records));
  write_text(opts.out_dir / "table.txt", summary_table(records));
  write_text(opts.out_dir / "figure1.csv", figure1_csv(records));
  return records;
}

std::string summary_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "dataset,mode,objective,depth,k,epsilon,kappa,smart_pairs,seeds,feasible,mean_ari,mean_nmi,mean_clauses,"
         "mean_time,error\n";
  for (const auto& r : records) {
    const auto& c = r.config;
    std::string err = r.error.value_or("");
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << c.dataset_name() << ',' << to_string(c.mode) << ',' << to_string(c.objective) << ',' << c.depth << ','
        << r.k << ',' << format_number(c.epsilon) << ',' << format_number(c.kappa) << ',' << (c.smart_pairs ? 1 : 0)
        << ',' << r.seeds.size() << ',' << r.feasible() << ',' << opt_num(r.mean_ari()) << ','
        << opt_num(r.mean_nmi()) << ',' << format_number(r.mean_clauses()) << ',' << format_number(r.mean_time())
        << ',' << err << '\n';
  }
  return out.str();
}

std::string summary_json(const std::vector<RunRecord>& records) {
  json arr = json::array();
  for (const auto& r : records) {
    const auto& c = r.config;
    json j;
    j["dataset"] = c.dataset_name();
    j["mode"] = to_string(c.mode);
    j["objective"] = to_string(c.objective);
    j["depth"] = c.depth;
    j["k"] = r.k;
    j["epsilon"] = finite_or_null(c.epsilon);
    j["kappa"] = c.kappa;
    j["smart_pairs"] = c.smart_pairs;
    j["time_limit"] = c.time_limit;
    j["solver"] = c.backend.command;
    j["feasible"] = r.feasible();
    j["mean_ari"] = opt_json(r.mean_ari());
    j["mean_nmi"] = opt_json(r.mean_nmi());
    j["mean_clauses"] = r.mean_clauses();
    j["mean_time"] = r.mean_time();
    j["error"] = opt_json(r.error);
    json seeds = json::array();
    for (const auto& s : r.seeds) {
      json e;
      e["seed"] = s.seed;
      e["status"] = to_string(s.status);
      e["ari"] = opt_json(s.ari);
      e["nmi"] = opt_json(s.nmi);
      e["wall_time"] = s.wall_time;
      e["clauses"] = s.clauses;
      e["lambda_plus"] = opt_json(s.lambda_plus);
      e["lambda_minus"] = opt_json(s.lambda_minus);
      e["ms"] = s.ms ? finite_or_null(*s.ms) : json(nullptr);
      e["md"] = opt_json(s.md);
      seeds.push_back(std::move(e));
    }
    j["runs"] = std::move(seeds);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string summary_table(const std::vector<RunRecord>& records) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Dataset", "Mode", "Obj", "d", "k", "eps", "kappa", "SP", "ARI", "NMI", "Feas.", "Time (s)", "Clauses"});
  auto fixed = [](double v, int prec) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(prec);
    s << v;
    return s.str();
  };
  for (const auto& r : records) {
    const auto& c = r.config;
    std::vector<std::string> row{c.dataset_name(),
                                 to_string(c.mode),
                                 to_string(c.objective),
                                 std::to_string(c.depth),
                                 std::to_string(r.k),
                                 format_number(c.epsilon),
                                 format_number(c.kappa),
                                 c.smart_pairs ? "yes" : "no"};
    if (r.error) {
      row.insert(row.end(), {"error", "", "", "", ""});
    } else {
      const auto ari = r.mean_ari(), nmi = r.mean_nmi();
      row.push_back(ari ? fixed(*ari, 2) : "-");
      row.push_back(nmi ? fixed(*nmi, 2) : "-");
      row.push_back(std::to_string(r.feasible()));
      row.push_back(fixed(r.mean_time(), 1));
      row.push_back(fixed(r.mean_clauses(), 1));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += "  ";
      out += rows[r][c] + std::string(width[c] - rows[r][c].size(), ' ');
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w + 2;
      out += std::string(total - 2, '-') + '\n';
    }
  }
  for (const auto& r : records)
    if (r.error) out += r.config.dataset_name() + " kappa " + format_number(r.config.kappa) + ": " + *r.error + "\n";
  return out;
}

std::string figure1_csv(const std::vector<RunRecord>& records) {
  struct Acc {
    double ari_sum = 0;
    std::size_t ari_cells = 0, feasible = 0, runs = 0, cells = 0;
  };
  std::map<std::tuple<std::string, std::string, double>, Acc> acc;
  for (const auto& r : records) {
    if (r.error) continue;
    auto& a = acc[{to_string(r.config.mode), to_string(r.config.objective), r.config.kappa}];
    if (auto m = r.mean_ari()) {
      a.ari_sum += *m;
      ++a.ari_cells;
    }
    a.feasible += r.feasible();
    a.runs += r.seeds.size();
    ++a.cells;
  }
  std::ostringstream out;
  out << "mode,objective,kappa,mean_ari,feasible_pct,datasets\n";
  for (const auto& [key, a] : acc) {
    const auto& [mode, obj, kappa] = key;
    out << mode << ',' << obj << ',' << format_number(kappa) << ','
        << (a.ari_cells ? format_number(a.ari_sum / static_cast<double>(a.ari_cells)) : "") << ','
        << format_number(a.runs ? 100.0 * static_cast<double>(a.feasible) / static_cast<double>(a.runs) : 0.0) << ','
        << a.cells << '\n';
  }
  return out.str();
}

}  // namespace treeclust
