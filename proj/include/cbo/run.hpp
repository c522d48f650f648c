#ifndef CBO_RUN_HPP
#define CBO_RUN_HPP

#include <functional>
#include <optional>

#include "cbo/ensemble.hpp"
#include "cbo/objectives.hpp"
#include "cbo/scheduler.hpp"
#include "cbo/trace.hpp"

namespace cbo {

// Any satisfied criterion stops the run; the V and radius tests need the
// objective to carry a known minimizer.
struct StopCriteria {
  std::int64_t max_steps = 1000;
  std::optional<double> epsilon_V;      // stop once V(rho_hat) <= epsilon_V
  std::optional<double> target_radius;  // stop once ||v_alpha - v*||_inf < radius
};

struct RunOptions {
  double ball_radius = 0.5;       // r for the per-step ball-mass diagnostic
  bool record_consensus = false;  // keep every consensus vector, not just the last
  // Invoked after cooling/reduction at each epoch boundary with the new epoch
  // state and the last consensus of the finished epoch.
  std::function<void(const EpochState&, const Ensemble&, const ConsensusPoint&)> on_epoch_end;
};

// Iterates batch selection -> consensus -> Euler-Maruyama step, recording
// diagnostics every step (including the initial state at step 0). The
// schedule, when given, cools alpha/sigma and applies particle reduction at
// epoch boundaries; without one, the consensus uses all active particles and
// params.alpha/params.sigma throughout. RNG lineage comes from ens.seed.
RunTrace run(const Objective& objective, const CboParams& params,
             const std::optional<Schedule>& schedule, const StopCriteria& stop, Ensemble ens,
             const RunOptions& options = {});

}  // namespace cbo

#endif
