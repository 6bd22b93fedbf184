#include "olqr/instance_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "olqr/error.hpp"

namespace olqr {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

void write_values(std::ostream& out, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << ' ' << format_double(m(r, c));
    }
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-empty, non-comment line split into tokens.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ss(line);
      tokens.clear();
      std::string tok;
      while (ss >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return true;
    }
    return false;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw Error(ErrorCode::kParse,
              "instance line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') parse_fail(line, "bad number '" + s + "'");
  return v;
}

long long parse_int(const std::string& s, int line) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') parse_fail(line, "bad integer '" + s + "'");
  return v;
}

Matrix parse_matrix(const std::vector<std::string>& tokens, std::size_t offset,
                    Eigen::Index rows, Eigen::Index cols, int line) {
  if (tokens.size() != offset + static_cast<std::size_t>(rows * cols)) {
    parse_fail(line, "'" + tokens[0] + "' expects " +
                         std::to_string(rows * cols) + " values");
  }
  Matrix m(rows, cols);
  std::size_t k = offset;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_double(tokens[k++], line);
  }
  return m;
}

}  // namespace

void write_instance(std::ostream& out, const Instance& inst) {
  const auto& sys = inst.sys;
  const int T = inst.costs.horizon();
  out << "olqr-instance 1\n";
  out << "dims " << sys.n() << ' ' << sys.nu() << ' ' << sys.nd() << '\n';
  out << "horizon " << T << '\n';
  out << "seed " << inst.seed << '\n';
  out << "profile " << (inst.profile.empty() ? "custom" : inst.profile) << '\n';
  auto record = [&](const char* key, const Matrix& m) {
    out << key;
    write_values(out, m);
    out << '\n';
  };
  record("A", sys.A);
  record("Bu", sys.Bu);
  record("Bd", sys.Bd);
  record("Qmin", inst.bounds.Q_min);
  record("Qmax", inst.bounds.Q_max);
  record("Rmin", inst.bounds.R_min);
  record("Rmax", inst.bounds.R_max);
  record("x1", inst.trace.x1());
  for (int t = 1; t <= T; ++t) {
    out << "Q " << t;
    write_values(out, inst.costs.Q(t));
    out << '\n';
  }
  for (int t = 1; t <= T - 1; ++t) {
    out << "R " << t;
    write_values(out, inst.costs.R(t));
    out << '\n';
  }
  for (int t = 1; t <= T - 1; ++t) {
    out << "d " << t;
    write_values(out, inst.trace.d(t));
    out << '\n';
  }
}

Instance read_instance(std::istream& in) {
  LineReader reader(in);
  std::vector<std::string> tok;
  if (!reader.next(tok) || tok.size() != 2 || tok[0] != "olqr-instance" ||
      tok[1] != "1") {
    parse_fail(reader.line(), "missing 'olqr-instance 1' header");
  }
  long long n = -1, nu = -1, nd = -1, T = -1;
  std::uint64_t seed = 0;
  std::string profile = "custom";
  std::map<std::string, Matrix> fixed;
  std::map<long long, Matrix> q, r, d;

  while (reader.next(tok)) {
    const int line = reader.line();
    const std::string& key = tok[0];
    if (key == "dims") {
      if (tok.size() != 4) parse_fail(line, "dims expects 3 values");
      n = parse_int(tok[1], line);
      nu = parse_int(tok[2], line);
      nd = parse_int(tok[3], line);
      if (n < 1 || nu < 1 || nd < 1) parse_fail(line, "dims must be >= 1");
      continue;
    }
    if (key == "horizon") {
      if (tok.size() != 2) parse_fail(line, "horizon expects 1 value");
      T = parse_int(tok[1], line);
      continue;
    }
    if (key == "seed") {
      if (tok.size() != 2) parse_fail(line, "seed expects 1 value");
      seed = std::strtoull(tok[1].c_str(), nullptr, 10);
      continue;
    }
    if (key == "profile") {
      if (tok.size() != 2) parse_fail(line, "profile expects 1 value");
      profile = tok[1];
      continue;
    }
    if (n < 0) parse_fail(line, "dims must precede matrices");
    if (key == "A" || key == "Qmin" || key == "Qmax") {
      fixed[key] = parse_matrix(tok, 1, n, n, line);
    } else if (key == "Bu") {
      fixed[key] = parse_matrix(tok, 1, n, nu, line);
    } else if (key == "Bd") {
      fixed[key] = parse_matrix(tok, 1, n, nd, line);
    } else if (key == "Rmin" || key == "Rmax") {
      fixed[key] = parse_matrix(tok, 1, nu, nu, line);
    } else if (key == "x1") {
      fixed[key] = parse_matrix(tok, 1, n, 1, line);
    } else if (key == "Q" || key == "R" || key == "d") {
      if (tok.size() < 2) parse_fail(line, key + " needs a stage index");
      const long long t = parse_int(tok[1], line);
      if (key == "Q") q[t] = parse_matrix(tok, 2, n, n, line);
      if (key == "R") r[t] = parse_matrix(tok, 2, nu, nu, line);
      if (key == "d") d[t] = parse_matrix(tok, 2, nd, 1, line);
    } else {
      parse_fail(line, "unknown record '" + key + "'");
    }
  }
  if (T < 2) parse_fail(reader.line(), "horizon missing or < 2");
  for (const char* key : {"A", "Bu", "Bd", "Qmin", "Qmax", "Rmin", "Rmax", "x1"}) {
    if (!fixed.count(key)) parse_fail(reader.line(), std::string("missing ") + key);
  }
  auto collect = [&](std::map<long long, Matrix>& src, long long count,
                     const char* name) {
    std::vector<Matrix> out;
    for (long long t = 1; t <= count; ++t) {
      auto it = src.find(t);
      if (it == src.end()) {
        parse_fail(reader.line(), std::string("missing ") + name + " " +
                                      std::to_string(t));
      }
      out.push_back(std::move(it->second));
    }
    if (static_cast<long long>(src.size()) != count) {
      parse_fail(reader.line(), std::string("unexpected extra ") + name);
    }
    return out;
  };
  std::vector<Matrix> Q = collect(q, T, "Q");
  std::vector<Matrix> R = collect(r, T - 1, "R");
  std::vector<Matrix> D = collect(d, T - 1, "d");
  std::vector<Vector> dv;
  dv.reserve(D.size());
  for (auto& m : D) dv.emplace_back(m.col(0));

  return Instance{LinearSystem(fixed["A"], fixed["Bu"], fixed["Bd"]),
                  CostSchedule(std::move(Q), std::move(R)),
                  CostBounds{fixed["Qmin"], fixed["Qmax"], fixed["Rmin"],
                             fixed["Rmax"]},
                  DisturbanceTrace(std::move(dv), Vector(fixed["x1"].col(0))),
                  seed,
                  profile};
}

void save_instance(const std::string& path, const Instance& inst) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  write_instance(out, inst);
  if (!out) throw Error(ErrorCode::kIo, "write to '" + path + "' failed");
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  return read_instance(in);
}

}  // namespace olqr
