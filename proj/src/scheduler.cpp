#include "cbo/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cbo/rng.hpp"

namespace cbo {

EpochState cool(const Schedule& sched, int epoch, long active_n) {
  if (epoch < 0) throw std::invalid_argument("cool: epoch must be >= 0");
  EpochState st;
  st.epoch = epoch;
  st.alpha = sched.alpha_initial * std::pow(sched.alpha_factor, epoch);
  st.sigma = sched.sigma0 / std::log2(static_cast<double>(epoch) + 2.0);
  st.active_n = active_n;
  return st;
}

namespace {

// First n entries of a Fisher-Yates pass over [0, population).
std::vector<int> sample_without_replacement(long population, long n, rng::CounterStream& cs) {
  std::vector<int> idx(static_cast<std::size_t>(population));
  std::iota(idx.begin(), idx.end(), 0);
  for (long i = 0; i < n; ++i) {
    const long j = i + static_cast<long>(cs.next_below(static_cast<std::uint64_t>(population - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(n));
  return idx;
}

}  // namespace

Batches BatchSelector::select(std::int64_t step, int epoch, long step_in_epoch, long dataset_size,
                              int n_E, long active_n, int n_N) {
  Batches out;

  if (dataset_size > 0) {
    if (n_E > dataset_size) throw std::invalid_argument("select: n_E larger than dataset");
    if (perm_epoch_ != epoch) {
      perm_.resize(static_cast<std::size_t>(dataset_size));
      std::iota(perm_.begin(), perm_.end(), 0);
      rng::CounterStream cs(seed_, rng::Stream::DataShuffle, static_cast<std::uint64_t>(epoch), 0);
      for (long i = dataset_size - 1; i > 0; --i) {
        const long j = static_cast<long>(cs.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm_[static_cast<std::size_t>(i)], perm_[static_cast<std::size_t>(j)]);
      }
      perm_epoch_ = epoch;
    }
    const long blocks = dataset_size / n_E;
    const long block = blocks > 0 ? step_in_epoch % blocks : 0;
    out.data.assign(perm_.begin() + block * n_E, perm_.begin() + (block + 1) * n_E);
  }

  if (n_N > active_n) throw std::invalid_argument("select: n_N larger than active particle count");
  rng::CounterStream cs(seed_, rng::Stream::AgentBatch, static_cast<std::uint64_t>(step), 0);
  out.agents = sample_without_replacement(active_n, n_N, cs);
  return out;
}

double position_variance_trace(const Ensemble& ens) {
  const long d = ens.dim();
  const long n = ens.active_count;
  std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
  for (long i = 0; i < n; ++i) {
    const double* v = ens.positions.row(i);
    for (long k = 0; k < d; ++k) mean[static_cast<std::size_t>(k)] += v[k];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  double acc = 0.0;
  for (long i = 0; i < n; ++i) {
    const double* v = ens.positions.row(i);
    for (long k = 0; k < d; ++k) {
      const double diff = v[k] - mean[static_cast<std::size_t>(k)];
      acc += diff * diff;
    }
  }
  return acc / static_cast<double>(n);
}

void reduce_particles(Ensemble& ens, const ReductionPolicy& policy, int epoch,
                      bool at_epoch_boundary) {
  if (!at_epoch_boundary || policy.shrink_fraction <= 0.0) return;
  if (policy.shrink_fraction >= 1.0)
    throw std::invalid_argument("reduce_particles: shrink_fraction must be in [0,1)");
  if (position_variance_trace(ens) >= policy.var_threshold) return;

  const long current = ens.active_count;
  const long target = std::max(
      policy.n_min,
      static_cast<long>(std::ceil(static_cast<double>(current) * (1.0 - policy.shrink_fraction))));
  if (target >= current) return;

  rng::CounterStream cs(ens.seed, rng::Stream::Reduction, static_cast<std::uint64_t>(epoch), 0);
  const auto victims = sample_without_replacement(current, current - target, cs);
  std::vector<char> dead(static_cast<std::size_t>(current), 0);
  for (int v : victims) dead[static_cast<std::size_t>(v)] = 1;

  // Compact survivors in order; retired rows keep their storage.
  long write = 0;
  for (long i = 0; i < current; ++i) {
    if (dead[static_cast<std::size_t>(i)]) continue;
    if (write != i) {
      std::copy_n(ens.positions.row(i), ens.dim(), ens.positions.row(write));
    }
    ++write;
  }
  ens.active_count = target;
}

}  // namespace cbo
