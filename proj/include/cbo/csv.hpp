#ifndef CBO_CSV_HPP
#define CBO_CSV_HPP

#include <string>
#include <vector>

#include "cbo/trace.hpp"

namespace cbo {

inline constexpr const char* kTraceHeader = "step,t,V,dist_inf,dist_2,ball_mass,alpha,sigma,active_N";

// Fixed column order, %.17g doubles; identical traces serialize to identical
// bytes.
void write_trace_csv(const RunTrace& trace, const std::string& path);
std::string trace_csv_string(const RunTrace& trace);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Numeric CSV reader (header row + double cells; "nan" parses to NaN).
CsvTable read_csv(const std::string& path);

RunTrace trace_from_table(const CsvTable& table);

}  // namespace cbo

#endif
