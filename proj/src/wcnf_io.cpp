#include "treeclust/encoding.hpp"

#include "treeclust/error.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace treeclust {

namespace {

void append_int(std::string& s, long long v) {
  char buf[24];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, p);
}

void append_clause(std::string& line, std::uint64_t weight, std::span<const int> lits) {
  line.clear();
  append_int(line, static_cast<long long>(weight));
  for (int l : lits) {
    line += ' ';
    append_int(line, l);
  }
  line += " 0\n";
}

}  // namespace

void write_wcnf(const WcnfFormula& f, std::ostream& out) {
  const std::uint64_t top = f.top();
  out << "p wcnf " << f.n_vars << ' ' << f.num_clauses() << ' ' << top << '\n';
  std::string line;
  for (std::size_t c = 0; c < f.hard.size(); ++c) {
    append_clause(line, top, f.hard[c]);
    out << line;
  }
  for (std::size_t c = 0; c < f.soft.size(); ++c) {
    append_clause(line, f.soft_weight[c], f.soft[c]);
    out << line;
  }
}

void write_wcnf(const WcnfFormula& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write WCNF file: " + path.string());
  write_wcnf(f, out);
  if (!out) throw Error("I/O error while writing " + path.string());
}

WcnfFormula read_wcnf(std::istream& in) {
  WcnfFormula f;
  std::uint64_t top = 0;
  bool have_header = false;
  int max_var = 0;
  std::string line;
  std::vector<int> lits;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == 'c') continue;
    std::istringstream ss(line.substr(b));
    if (line[b] == 'p') {
      std::string p, fmt;
      long long nv = 0, nc = 0;
      if (!(ss >> p >> fmt >> nv >> nc >> top) || fmt != "wcnf")
        throw Error("WCNF line " + std::to_string(line_no) + ": bad header");
      f.n_vars = static_cast<int>(nv);
      have_header = true;
      continue;
    }
    bool hard = false;
    std::uint64_t weight = 0;
    if (line[b] == 'h') {
      hard = true;
      ss.get();
    } else {
      if (!(ss >> weight)) throw Error("WCNF line " + std::to_string(line_no) + ": missing weight");
      hard = have_header && weight >= top;
    }
    lits.clear();
    long long l = 0;
    bool terminated = false;
    while (ss >> l) {
      if (l == 0) {
        terminated = true;
        break;
      }
      lits.push_back(static_cast<int>(l));
      max_var = std::max(max_var, static_cast<int>(l < 0 ? -l : l));
    }
    if (!terminated) throw Error("WCNF line " + std::to_string(line_no) + ": clause not 0-terminated");
    if (hard)
      f.add_hard(ClauseFamily::kExternal, lits);
    else
      f.add_soft(lits, weight);
  }
  f.n_vars = std::max(f.n_vars, max_var);
  return f;
}

WcnfFormula read_wcnf(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open WCNF file: " + path.string());
  return read_wcnf(in);
}

}  // namespace treeclust
