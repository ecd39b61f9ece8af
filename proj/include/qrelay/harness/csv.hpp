#pragma once

// Minimal CSV for the harness outputs: fields never contain commas, quotes
// or newlines, so no quoting is needed.

#include <qrelay/types.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace qrelay::harness {

/// Shortest round-trip text for a double; non-finite values become "NaN".
inline std::string fmt(double v) {
  if (!std::isfinite(v)) return "NaN";
  char buf[32];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double parse_double(const std::string& s) {
  if (s == "NaN" || s.empty()) return std::nan("");
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw InvalidArgument("csv: bad number '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string join_csv(const std::vector<std::string>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) s += ',';
    s += f[i];
  }
  return s;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw InvalidArgument("csv: missing column '" + name + "'");
  }
};

/// Reads a table; a truncated final line (no trailing newline or a short
/// field count) is dropped, which is what an interrupted append leaves.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("csv: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  CsvTable t;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) break;
    auto fields = split_csv_line(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (first) {
      t.header = std::move(fields);
      first = false;
    } else if (fields.size() == t.header.size()) {
      t.rows.push_back(std::move(fields));
    }
  }
  return t;
}

inline void write_csv(const std::string& path, const CsvTable& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("csv: cannot write " + path);
  out << join_csv(t.header) << '\n';
  for (const auto& r : t.rows) out << join_csv(r) << '\n';
}

}  // namespace qrelay::harness
