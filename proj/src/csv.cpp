#include "cbo/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbo {

namespace {

void append_double(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  out += buf;
}

}  // namespace

std::string trace_csv_string(const RunTrace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const auto& s : trace.steps) {
    out += std::to_string(s.step);
    out += ',';
    append_double(out, s.t);
    out += ',';
    append_double(out, s.V);
    out += ',';
    append_double(out, s.dist_inf);
    out += ',';
    append_double(out, s.dist_2);
    out += ',';
    append_double(out, s.ball_mass);
    out += ',';
    append_double(out, s.alpha);
    out += ',';
    append_double(out, s.sigma);
    out += ',';
    out += std::to_string(s.active_n);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path);
  f << trace_csv_string(trace);
  if (!f) throw std::runtime_error("write_trace_csv: write failed for " + path);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("read_csv: empty file " + path);
  std::stringstream hdr(line);
  std::string cell;
  while (std::getline(hdr, cell, ',')) table.header.push_back(cell);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) {
      vals.push_back(std::strtod(cell.c_str(), nullptr));
    }
    if (vals.size() != table.header.size())
      throw std::runtime_error("read_csv: ragged row in " + path);
    table.rows.push_back(std::move(vals));
  }
  return table;
}

RunTrace trace_from_table(const CsvTable& table) {
  if (table.header.size() != 9)
    throw std::runtime_error("trace_from_table: expected 9 columns");
  RunTrace trace;
  trace.steps.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    StepRecord s;
    s.step = static_cast<std::int64_t>(r[0]);
    s.t = r[1];
    s.V = r[2];
    s.dist_inf = r[3];
    s.dist_2 = r[4];
    s.ball_mass = r[5];
    s.alpha = r[6];
    s.sigma = r[7];
    s.active_n = static_cast<long>(r[8]);
    trace.steps.push_back(s);
  }
  return trace;
}

}  // namespace cbo
