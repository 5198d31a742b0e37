// CSV serialization for grid and trajectory results.  Output is byte-stable:
// 17-significant-digit floats, LF line endings, deterministic row order.
#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "activeset/experiments.hpp"

namespace activeset {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
struct HeatmapRow {
  double x1, x2, eps, fraction;
  std::string method;
};
}  // namespace detail

/// Schema: x1,x2,method,eps,success_fraction; rows sorted by
/// (method, eps, x1, x2).
inline std::string heatmap_csv_text(const std::vector<GridCell>& cells) {
  if (cells.empty()) throw std::invalid_argument("heatmap_csv_text: no cells");
  std::vector<detail::HeatmapRow> rows;
  rows.reserve(cells.size() * 2);
  for (const GridCell& c : cells) {
    rows.push_back({c.x1, c.x2, c.eps, c.lp_fraction, "lp"});
    rows.push_back({c.x1, c.x2, c.eps, c.qp_fraction, "qp"});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.method != b.method) return a.method < b.method;
    if (a.eps != b.eps) return a.eps < b.eps;
    if (a.x1 != b.x1) return a.x1 < b.x1;
    return a.x2 < b.x2;
  });
  std::string out = "x1,x2,method,eps,success_fraction\n";
  for (const auto& r : rows) {
    out += format_double(r.x1);
    out += ',';
    out += format_double(r.x2);
    out += ',';
    out += r.method;
    out += ',';
    out += format_double(r.eps);
    out += ',';
    out += format_double(r.fraction);
    out += '\n';
  }
  return out;
}

inline void write_file(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << text;
  if (!f) throw io_error("write failed: " + path);
}

inline void emit_heatmap_csv(const std::vector<GridCell>& cells, const std::string& path) {
  write_file(heatmap_csv_text(cells), path);
}

/// Schema: iter,x1,x2,method,correct_mean,exact_fraction.
inline std::string trajectory_csv_text(const std::vector<TraceRecord>& trace) {
  std::string out = "iter,x1,x2,method,correct_mean,exact_fraction\n";
  for (const TraceRecord& r : trace) {
    for (const char* method : {"lp", "qp"}) {
      out += std::to_string(r.iter);
      out += ',';
      out += format_double(r.x[0]);
      out += ',';
      out += format_double(r.x[1]);
      out += ',';
      out += method;
      out += ',';
      out += format_double(method[0] == 'l' ? r.lp_correct_mean : r.qp_correct_mean);
      out += ',';
      out += format_double(method[0] == 'l' ? r.lp_exact_fraction : r.qp_exact_fraction);
      out += '\n';
    }
  }
  return out;
}

inline void emit_trajectory_csv(const std::vector<TraceRecord>& trace, const std::string& path) {
  write_file(trajectory_csv_text(trace), path);
}

struct csv_parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedHeatmap {
  std::vector<double> x1, x2, eps, fraction;
  std::vector<std::string> method;
};

inline ParsedHeatmap parse_heatmap_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line)) throw csv_parse_error(path + ": empty file");
  if (line != "x1,x2,method,eps,success_fraction")
    throw csv_parse_error(path + ":1: expected header x1,x2,method,eps,success_fraction");
  ParsedHeatmap out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5)
      throw csv_parse_error(path + ":" + std::to_string(lineno) + ": expected 5 columns, got " +
                            std::to_string(fields.size()));
    try {
      out.x1.push_back(std::stod(fields[0]));
      out.x2.push_back(std::stod(fields[1]));
      out.method.push_back(fields[2]);
      out.eps.push_back(std::stod(fields[3]));
      out.fraction.push_back(std::stod(fields[4]));
    } catch (const std::exception&) {
      throw csv_parse_error(path + ":" + std::to_string(lineno) + ": malformed numeric field");
    }
  }
  return out;
}

}  // namespace activeset
