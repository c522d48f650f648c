#ifndef CBO_ENSEMBLE_HPP
#define CBO_ENSEMBLE_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbo/matrix.hpp"

namespace cbo {

enum class Diffusion { Isotropic, Anisotropic };

// Drift/diffusion/weight/time-step parameters of the particle dynamics.
struct CboParams {
  double lambda = 1.0;   // drift strength
  double sigma = 0.0;    // noise strength
  double alpha = 1.0;    // weight sharpness
  double dt = 0.01;      // time step
  Diffusion diffusion = Diffusion::Anisotropic;

  // Throws std::invalid_argument on out-of-domain values.
  void validate() const;

  // Advisory, not an error: the convergence regime needs 2*lambda > sigma^2.
  bool well_posed() const { return 2.0 * lambda > sigma * sigma; }
};

// exp(-alpha*E)-weighted mean of particle positions.
struct ConsensusPoint {
  std::vector<double> point;
  // log of the weight sum after the min-shift, i.e. log sum_i exp(-alpha*(E_i - min_j E_j)).
  // In [0, log n]; near 0 means a single particle dominates.
  double log_normalizer = 0.0;
};

// N x d particle state with RNG lineage. Rows beyond active_count are retired
// (particle reduction shrinks active_count, never the allocation).
struct Ensemble {
  Matrix positions;
  std::int64_t step_index = 0;
  std::uint64_t seed = 0;
  long active_count = 0;

  long dim() const { return positions.cols; }
};

// Thrown when a step produces a non-finite coordinate.
struct BlowUpError : std::runtime_error {
  std::int64_t step_index;
  long particle;
  BlowUpError(std::int64_t step, long p)
      : std::runtime_error("non-finite position at step " + std::to_string(step) +
                           ", particle " + std::to_string(p)),
        step_index(step),
        particle(p) {}
};

// Initial law for sample_initial: i.i.d. Gaussian N(mean, scale^2 I) or
// uniform on the box [lo, hi]^d (lo == hi is the degenerate point mass).
struct InitialLaw {
  enum class Kind { Gaussian, Box };
  Kind kind = Kind::Gaussian;
  double mean = 0.0;
  double scale = 1.0;
  double lo = -1.0;
  double hi = 1.0;

  static InitialLaw gaussian(double mean, double scale) {
    return {Kind::Gaussian, mean, scale, 0.0, 0.0};
  }
  static InitialLaw box(double lo, double hi) { return {Kind::Box, 0.0, 0.0, lo, hi}; }
};

Ensemble sample_initial(const InitialLaw& law, long n, long d, std::uint64_t seed);

// Weighted average of positions.row(rows[j]) with weights
// exp(-alpha*(values[j] - min values)). The min-shift keeps weights finite for
// any alpha (alpha = 1e15 selects the best row exactly).
ConsensusPoint consensus_point(const Matrix& positions, std::span<const int> rows,
                               std::span<const double> values, double alpha);

// Convenience overload over rows [0, n_rows).
ConsensusPoint consensus_point_all(const Matrix& positions, long n_rows,
                                   std::span<const double> values, double alpha);

// Scales the noise vector: isotropic -> ||delta||_2 * z, anisotropic -> delta ⊙ z.
void diffusion_term(std::span<const double> delta, Diffusion kind, std::span<const double> noise,
                    std::span<double> out);

// One Euler-Maruyama step: V <- V - lambda*dt*(V - va) + sigma*sqrt(dt)*D(V - va)*Z,
// one fresh Gaussian vector per particle from the stream keyed by
// (seed, step_index, particle). All particles move from the same va snapshot;
// step_index increments. Throws BlowUpError on non-finite output.
void step(Ensemble& ens, const CboParams& params, const ConsensusPoint& va);

}  // namespace cbo

#endif
