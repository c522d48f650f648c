#ifndef CBO_SCHEDULER_HPP
#define CBO_SCHEDULER_HPP

#include <cstdint>
#include <vector>

#include "cbo/ensemble.hpp"

namespace cbo {

// Variance-triggered particle reduction. Shrinking is off until
// shrink_fraction > 0.
struct ReductionPolicy {
  double var_threshold = 0.0;
  double shrink_fraction = 0.0;  // in [0, 1)
  long n_min = 2;
};

// Per-epoch cooling and mini-batch sizes of the training recipe:
// alpha_epoch = alpha_initial * alpha_factor^epoch,
// sigma_epoch = sigma0 / log2(epoch + 2).
struct Schedule {
  double alpha_initial = 50.0;
  double alpha_factor = 2.0;
  double sigma0 = 0.632455532033675866;  // sqrt(0.4)
  int n_E = 60;   // objective mini-batch size
  int n_N = 100;  // agent mini-batch size
  long steps_per_epoch = 100;
  ReductionPolicy reduction;
};

struct EpochState {
  int epoch = 0;
  double alpha = 0.0;
  double sigma = 0.0;
  long active_n = 0;
};

// lambda is untouched by cooling; only alpha and sigma follow the schedule.
EpochState cool(const Schedule& sched, int epoch, long active_n = 0);

struct Batches {
  std::vector<int> data;    // without replacement within the step
  std::vector<int> agents;  // without replacement within the step
};

// Data batches come block-wise from a per-epoch shuffled permutation, so the
// blocks of one epoch are disjoint and (when n_E divides M) cover the dataset.
// Agent batches are resampled uniformly every step. Pure given (seed, step,
// epoch); holds only the cached epoch permutation.
class BatchSelector {
 public:
  explicit BatchSelector(std::uint64_t seed) : seed_(seed) {}

  // step_in_epoch indexes the permutation block; M = 0 means no dataset.
  Batches select(std::int64_t step, int epoch, long step_in_epoch, long dataset_size, int n_E,
                 long active_n, int n_N);

 private:
  std::uint64_t seed_;
  int perm_epoch_ = -1;
  std::vector<int> perm_;
};

// trace of the (population) covariance of active positions.
double position_variance_trace(const Ensemble& ens);

// At an epoch boundary: if the position-variance trace is below the threshold,
// active_count shrinks to max(n_min, ceil(active*(1-shrink_fraction))),
// discarding uniformly random particles; otherwise no-op. Victim choice is
// keyed by (ensemble seed, epoch).
void reduce_particles(Ensemble& ens, const ReductionPolicy& policy, int epoch,
                      bool at_epoch_boundary);

}  // namespace cbo

#endif
