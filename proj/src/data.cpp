#include "treeclust/data.hpp"

#include "treeclust/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

namespace treeclust {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Minimal RFC4180-ish splitter: commas, optional double quotes.
std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e && std::isfinite(out);
}

}  // namespace

Dataset make_dataset(Matrix points, std::optional<std::vector<int>> labels) {
  if (points.rows() < 1 || points.cols() < 1) throw DataError("dataset must have at least one point and one feature");
  if (!points.allFinite()) throw DataError("dataset contains non-finite values");
  if (labels && labels->size() != static_cast<std::size_t>(points.rows()))
    throw DataError("label vector length does not match number of points");
  Dataset d;
  d.points = std::move(points);
  d.labels = std::move(labels);
  for (Eigen::Index j = 0; j < d.points.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
  if (d.labels) {
    int max_label = *std::max_element(d.labels->begin(), d.labels->end());
    for (int c = 0; c <= max_label; ++c) d.label_names.push_back(std::to_string(c));
  }
  return d;
}

Matrix min_max_normalize(const Eigen::Ref<const Matrix>& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double lo = m.col(j).minCoeff();
    const double hi = m.col(j).maxCoeff();
    if (!(hi > lo)) {
      out.col(j).setZero();
      continue;
    }
    // 100 / (hi - lo) is exactly 1 when the column already spans [0, 100],
    // which makes the transform an exact identity on normalized data.
    const double scale = 100.0 / (hi - lo);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, j);
      if (v == hi) {
        out(i, j) = 100.0;
      } else {
        out(i, j) = std::clamp((v - lo) * scale, 0.0, 100.0);
      }
    }
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path.string());

  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_csv_line(line);
      break;
    }
  }
  if (header.empty()) throw DataError("dataset file has no header row: " + path.string());
  if (!header.empty() && header[0].size() >= 3 && header[0].compare(0, 3, "\xEF\xBB\xBF") == 0)
    header[0] = header[0].substr(3);

  std::optional<std::size_t> label_col;
  if (opts.label_column) {
    auto it = std::find(header.begin(), header.end(), *opts.label_column);
    if (it == header.end()) throw DataError("label column '" + *opts.label_column + "' not found in " + path.string());
    label_col = static_cast<std::size_t>(it - header.begin());
  } else if (opts.has_labels) {
    label_col = header.size() - 1;
  }

  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (!label_col || c != *label_col) names.push_back(header[c]);
  if (names.empty()) throw DataError("dataset has no feature columns: " + path.string());

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, got " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (label_col && c == *label_col) {
        raw_labels.push_back(cells[c]);
        continue;
      }
      double v;
      if (!parse_real(cells[c], v))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell '" + cells[c] + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("dataset is empty: " + path.string());

  Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < names.size(); ++j) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  Dataset d;
  d.points = opts.normalize ? min_max_normalize(pts) : std::move(pts);
  d.feature_names = std::move(names);
  if (label_col) {
    std::map<std::string, int> ids;
    std::vector<int> labels;
    labels.reserve(raw_labels.size());
    for (const auto& s : raw_labels) {
      auto [it, inserted] = ids.emplace(s, static_cast<int>(d.label_names.size()));
      if (inserted) d.label_names.push_back(s);
      labels.push_back(it->second);
    }
    d.labels = std::move(labels);
  }
  return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write dataset file: " + path.string());
  out.precision(17);
  for (std::size_t j = 0; j < d.num_features(); ++j) out << (j ? "," : "") << d.feature_names.at(j);
  if (d.labels) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < d.num_features(); ++j)
      out << (j ? "," : "") << d.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    if (d.labels) out << ',' << d.label_names.at(static_cast<std::size_t>((*d.labels)[i]));
    out << '\n';
  }
}

IndexPair make_pair_canonical(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return {static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
}

ConstraintSet make_constraints(std::size_t n, std::vector<IndexPair> ml, std::vector<IndexPair> cl) {
  auto check = [n](std::vector<IndexPair>& pairs, const char* kind) {
    std::set<IndexPair> seen;
    for (auto& p : pairs) {
      if (p.first == p.second) throw DataError(std::string(kind) + " constraint links point " + std::to_string(p.first) + " to itself");
      if (p.first >= n || p.second >= n)
        throw DataError(std::string(kind) + " constraint index out of range (" + std::to_string(p.first) + ", " +
                        std::to_string(p.second) + ")");
      p = make_pair_canonical(p.first, p.second);
      if (!seen.insert(p).second)
        throw DataError(std::string(kind) + " constraint repeated: (" + std::to_string(p.first) + ", " + std::to_string(p.second) + ")");
    }
  };
  check(ml, "ML");
  check(cl, "CL");
  return ConstraintSet{std::move(ml), std::move(cl)};
}

std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t bound) {
  // Rejection sampling on the top of the range; bound > 0.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

ConstraintSet generate_constraints(const Dataset& d, double kappa, std::uint64_t seed) {
  if (!d.labels) throw ConfigError("constraint generation needs ground-truth labels");
  const std::size_t n = d.size();
  const double max_kappa = (static_cast<double>(n) - 1.0) / 2.0;
  if (!(kappa >= 0.0) || kappa > max_kappa)
    throw ConfigError("kappa must lie in [0, (|X|-1)/2] = [0, " + std::to_string(max_kappa) + "]");

  // The small slack keeps products like 0.29 * 100 from flooring to 28.
  const auto count = std::min<std::uint64_t>(
      static_cast<std::uint64_t>(std::floor(kappa * static_cast<double>(n) + 1e-9)),
      static_cast<std::uint64_t>(n) * (n - 1) / 2);
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  std::mt19937_64 rng(seed);

  // Decode a dense pair id into (i, j), i < j.
  auto decode = [n](std::uint64_t id) {
    std::uint64_t i = 0;
    std::uint64_t row = n - 1;
    while (id >= row) {
      id -= row;
      ++i;
      --row;
    }
    return make_pair_canonical(i, i + 1 + id);
  };

  std::vector<IndexPair> sampled;
  sampled.reserve(count);
  if (count * 2 <= total) {
    std::unordered_set<std::uint64_t> seen;
    while (sampled.size() < count) {
      const std::uint64_t a = uniform_index(rng, n);
      const std::uint64_t b = uniform_index(rng, n);
      if (a == b) continue;
      const auto p = make_pair_canonical(a, b);
      const std::uint64_t key = static_cast<std::uint64_t>(p.first) * n + p.second;
      if (seen.insert(key).second) sampled.push_back(p);
    }
  } else {
    std::vector<std::uint64_t> ids(total);
    std::iota(ids.begin(), ids.end(), 0);
    for (std::uint64_t k = 0; k < count; ++k) {
      const std::uint64_t r = k + uniform_index(rng, total - k);
      std::swap(ids[k], ids[r]);
      sampled.push_back(decode(ids[k]));
    }
  }

  ConstraintSet cs;
  for (const auto& p : sampled) {
    if ((*d.labels)[p.first] == (*d.labels)[p.second])
      cs.ml.push_back(p);
    else
      cs.cl.push_back(p);
  }
  return cs;
}

ConstraintSet read_constraints(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open constraint file: " + path.string());
  std::vector<IndexPair> ml, cl;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string kind;
    long long a = -1, b = -1;
    std::string rest;
    if (!(ss >> kind >> a >> b) || (ss >> rest) || a < 0 || b < 0 || (kind != "ML" && kind != "CL"))
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected 'ML i j' or 'CL i j'");
    IndexPair p{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
    (kind == "ML" ? ml : cl).push_back(p);
  }
  return make_constraints(n, std::move(ml), std::move(cl));
}

void write_constraints(const ConstraintSet& cs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write constraint file: " + path.string());
  for (const auto& p : cs.ml) out << "ML " << p.first << ' ' << p.second << '\n';
  for (const auto& p : cs.cl) out << "CL " << p.first << ' ' << p.second << '\n';
}

std::size_t PairTable::pair_id(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row-major index into the strict upper triangle.
  return i * num_points - i * (i + 1) / 2 + (j - i - 1);
}

double point_distance(const Dataset& d, std::size_t i, std::size_t j) {
  return (d.points.row(static_cast<Eigen::Index>(i)) - d.points.row(static_cast<Eigen::Index>(j))).norm();
}

PairTable pair_table(const Dataset& d) {
  const std::size_t n = d.size();
  if (n < 2) throw DataError("pair table needs at least two points");
  PairTable pt;
  pt.num_points = n;
  pt.pairs.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      pt.pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), point_distance(d, i, j)});
  std::sort(pt.pairs.begin(), pt.pairs.end(), [](const PairDistance& a, const PairDistance& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  pt.position.resize(pt.pairs.size());
  for (std::size_t k = 0; k < pt.pairs.size(); ++k)
    pt.position[pt.pair_id(pt.pairs[k].i, pt.pairs[k].j)] = static_cast<std::uint32_t>(k);
  return pt;
}

}  // namespace treeclust
