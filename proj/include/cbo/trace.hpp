#ifndef CBO_TRACE_HPP
#define CBO_TRACE_HPP

#include <cstdint>
#include <vector>

namespace cbo {

// One diagnostics row per time step. dist_* and V are NaN when the objective
// carries no known minimizer.
struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  double V = 0.0;          // (1/2N) sum ||V_i - v*||_2^2
  double dist_inf = 0.0;   // ||v_alpha - v*||_inf
  double dist_2 = 0.0;     // ||v_alpha - v*||_2
  double ball_mass = 0.0;  // fraction of particles with ||V_i - v*||_inf < r
  double alpha = 0.0;
  double sigma = 0.0;
  long active_n = 0;
};

struct RunTrace {
  std::vector<StepRecord> steps;
  // Consensus vectors per step; populated only when requested (large d runs
  // keep just the final one).
  std::vector<std::vector<double>> consensus;
  std::vector<double> final_consensus;
  double ball_radius = 0.0;  // r used for the ball_mass column
  double sup_dist_inf = 0.0; // running sup of dist_inf over the run (the constant B)

  bool empty() const { return steps.empty(); }
};

}  // namespace cbo

#endif
