#include "cbo/run.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "cbo/parallel.hpp"
#include "cbo/theory.hpp"

namespace cbo {

namespace {

double dist_inf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double dist_2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return std::sqrt(s);
}

}  // namespace

RunTrace run(const Objective& objective, const CboParams& params,
             const std::optional<Schedule>& schedule, const StopCriteria& stop, Ensemble ens,
             const RunOptions& options) {
  params.validate();
  if (objective.dim != ens.dim()) throw std::invalid_argument("run: dimension mismatch");
  if (!objective.eval && !objective.eval_batch)
    throw std::invalid_argument("run: objective has no evaluator");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::span<const double> vstar =
      objective.known_minimizer ? std::span<const double>(*objective.known_minimizer)
                                : std::span<const double>();

  const long dataset_size = static_cast<long>(objective.dataset_size);
  const long steps_per_epoch = schedule ? std::max<long>(1, schedule->steps_per_epoch) : 0;

  BatchSelector selector(ens.seed);
  EpochState epoch_state{0, params.alpha, params.sigma, ens.active_count};
  if (schedule) epoch_state = cool(*schedule, 0, ens.active_count);

  std::vector<int> all_data;
  if (dataset_size > 0 && !schedule) {
    all_data.resize(static_cast<std::size_t>(dataset_size));
    std::iota(all_data.begin(), all_data.end(), 0);
  }

  RunTrace trace;
  trace.ball_radius = options.ball_radius;

  std::vector<double> values;
  ConsensusPoint va;
  std::int64_t step_no = 0;
  while (true) {
    const int epoch = schedule ? static_cast<int>(step_no / steps_per_epoch) : 0;
    const long step_in_epoch = schedule ? step_no % steps_per_epoch : 0;

    Batches batches;
    if (schedule) {
      const int n_n = static_cast<int>(
          std::min<long>(schedule->n_N, ens.active_count));
      const int n_e = dataset_size > 0
                          ? static_cast<int>(std::min<long>(schedule->n_E, dataset_size))
                          : 0;
      batches =
          selector.select(step_no, epoch, step_in_epoch, dataset_size, n_e, ens.active_count, n_n);
    } else {
      batches.agents.resize(static_cast<std::size_t>(ens.active_count));
      std::iota(batches.agents.begin(), batches.agents.end(), 0);
      batches.data = all_data;
    }

    values.resize(batches.agents.size());
    const bool batched_eval = static_cast<bool>(objective.eval_batch);
    parallel_for(static_cast<long>(batches.agents.size()), [&](long j) {
      const auto row = ens.positions.row_span(batches.agents[static_cast<std::size_t>(j)]);
      values[static_cast<std::size_t>(j)] =
          batched_eval ? objective.eval_batch(row, batches.data) : objective.eval(row);
    });

    va = consensus_point(ens.positions, batches.agents, values, epoch_state.alpha);

    StepRecord rec;
    rec.step = step_no;
    rec.t = static_cast<double>(step_no) * params.dt;
    rec.alpha = epoch_state.alpha;
    rec.sigma = epoch_state.sigma;
    rec.active_n = ens.active_count;
    if (!vstar.empty()) {
      rec.V = theory::energy_V(ens, vstar);
      rec.dist_2 = dist_2(va.point, vstar);
      rec.dist_inf = dist_inf(va.point, vstar);
      rec.ball_mass = theory::ball_mass(ens, vstar, options.ball_radius);
      trace.sup_dist_inf = std::max(trace.sup_dist_inf, rec.dist_inf);
    } else {
      rec.V = rec.dist_2 = rec.dist_inf = rec.ball_mass = nan;
    }
    trace.steps.push_back(rec);
    if (options.record_consensus) trace.consensus.push_back(va.point);

    if (stop.epsilon_V && rec.V <= *stop.epsilon_V) break;
    if (stop.target_radius && rec.dist_inf < *stop.target_radius) break;
    if (step_no >= stop.max_steps) break;

    CboParams step_params = params;
    step_params.alpha = epoch_state.alpha;
    step_params.sigma = epoch_state.sigma;
    step(ens, step_params, va);
    ++step_no;

    if (schedule && step_no % steps_per_epoch == 0) {
      const int new_epoch = static_cast<int>(step_no / steps_per_epoch);
      reduce_particles(ens, schedule->reduction, new_epoch, true);
      epoch_state = cool(*schedule, new_epoch, ens.active_count);
      if (options.on_epoch_end) options.on_epoch_end(epoch_state, ens, va);
    }
  }

  trace.final_consensus = va.point;
  return trace;
}

}  // namespace cbo
