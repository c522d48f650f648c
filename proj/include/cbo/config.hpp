#ifndef CBO_CONFIG_HPP
#define CBO_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/run.hpp"
#include "cbo/scheduler.hpp"

namespace cbo {

// Raised for malformed or out-of-domain configuration; messages name the
// offending section.key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parsed experiment file: flat key=value lines grouped in [sections]. The raw
// text is kept verbatim for provenance echo into result files.
struct ExperimentConfig {
  std::string objective_name;
  long dim = 0;

  CboParams params;
  InitialLaw init;

  long n_particles = 1000;
  std::uint64_t seed = 1;
  StopCriteria stop;
  double ball_radius = 0.5;
  double success_radius = 0.25;
  int repeat = 1;
  int threads = 0;

  bool schedule_enabled = false;
  Schedule schedule;
  int epochs = 0;

  std::string out_dir = "out";
  std::string prefix = "run";

  std::string echo;  // original file contents
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);

// Per-run result summary serialized to JSON next to the trace CSV.
struct ResultRecord {
  std::string config_echo;
  std::uint64_t seed = 0;
  double fitted_rate = 0.0;
  bool rate_fit_ok = false;
  double final_V = 0.0;
  double final_dist_inf = 0.0;
  double success_radius = 0.0;
  bool success = false;
  double wall_seconds = 0.0;
  std::vector<double> accuracy_series;  // MNIST runs only
};

std::string result_record_json(const ResultRecord& rec);
void write_result_record(const ResultRecord& rec, const std::string& path);

}  // namespace cbo

#endif
