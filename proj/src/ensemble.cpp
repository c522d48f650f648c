#include "cbo/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "cbo/parallel.hpp"
#include "cbo/rng.hpp"

namespace cbo {

void CboParams::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("CboParams: lambda must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("CboParams: dt must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("CboParams: sigma must be >= 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("CboParams: alpha must be >= 0");
}

Ensemble sample_initial(const InitialLaw& law, long n, long d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_initial: n must be >= 1");
  if (d < 1) throw std::invalid_argument("sample_initial: d must be >= 1");
  if (law.kind == InitialLaw::Kind::Box && law.lo > law.hi)
    throw std::invalid_argument("sample_initial: box lo > hi");
  if (law.kind == InitialLaw::Kind::Gaussian && !(law.scale >= 0.0))
    throw std::invalid_argument("sample_initial: negative Gaussian scale");

  Ensemble ens;
  ens.positions = Matrix(n, d);
  ens.seed = seed;
  ens.active_count = n;

  parallel_for(n, [&](long i) {
    auto row = ens.positions.row_span(i);
    rng::CounterStream cs(seed, rng::Stream::Init, static_cast<std::uint64_t>(i), 0);
    if (law.kind == InitialLaw::Kind::Gaussian) {
      for (double& x : row) x = law.mean + law.scale * cs.next_gauss();
    } else {
      const double width = law.hi - law.lo;
      for (double& x : row) x = law.lo + width * cs.next_u01();
    }
  });
  return ens;
}

ConsensusPoint consensus_point(const Matrix& positions, std::span<const int> rows,
                               std::span<const double> values, double alpha) {
  if (rows.empty()) throw std::invalid_argument("consensus_point: empty subset");
  if (values.size() != rows.size())
    throw std::invalid_argument("consensus_point: rows/values size mismatch");
  if (!(alpha >= 0.0)) throw std::invalid_argument("consensus_point: alpha must be >= 0");

  double vmin = std::numeric_limits<double>::infinity();
  for (double e : values) {
    if (std::isnan(e)) throw std::invalid_argument("consensus_point: NaN objective value");
    vmin = std::min(vmin, e);
  }

  const long d = positions.cols;
  ConsensusPoint cp;
  cp.point.assign(d, 0.0);
  double wsum = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const double w = std::exp(-alpha * (values[j] - vmin));
    wsum += w;
    const double* v = positions.row(rows[j]);
    if (w != 0.0) {
      for (long k = 0; k < d; ++k) cp.point[k] += w * v[k];
    }
  }
  for (long k = 0; k < d; ++k) cp.point[k] /= wsum;
  cp.log_normalizer = std::log(wsum);
  return cp;
}

ConsensusPoint consensus_point_all(const Matrix& positions, long n_rows,
                                   std::span<const double> values, double alpha) {
  std::vector<int> rows(static_cast<std::size_t>(n_rows));
  for (long i = 0; i < n_rows; ++i) rows[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return consensus_point(positions, rows, values, alpha);
}

void diffusion_term(std::span<const double> delta, Diffusion kind, std::span<const double> noise,
                    std::span<double> out) {
  if (delta.size() != noise.size() || delta.size() != out.size())
    throw std::invalid_argument("diffusion_term: length mismatch");
  if (kind == Diffusion::Isotropic) {
    double norm2 = 0.0;
    for (double x : delta) norm2 += x * x;
    const double norm = std::sqrt(norm2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = norm * noise[k];
  } else {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = delta[k] * noise[k];
  }
}

void step(Ensemble& ens, const CboParams& params, const ConsensusPoint& va) {
  params.validate();
  const long d = ens.dim();
  if (static_cast<long>(va.point.size()) != d)
    throw std::invalid_argument("step: consensus dimension mismatch");

  const double drift = params.lambda * params.dt;
  const double noise_scale = params.sigma * std::sqrt(params.dt);
  const auto stepno = static_cast<std::uint64_t>(ens.step_index);

  std::atomic<long> first_bad{-1};  // lowest offending particle, for the error report

  parallel_for(ens.active_count, [&](long i) {
    double* v = ens.positions.row(i);
    rng::CounterStream cs(ens.seed, rng::Stream::ParticleNoise, stepno,
                          static_cast<std::uint64_t>(i));
    bool bad = false;
    if (params.diffusion == Diffusion::Isotropic) {
      double norm2 = 0.0;
      for (long k = 0; k < d; ++k) {
        const double delta = v[k] - va.point[k];
        norm2 += delta * delta;
      }
      const double norm = std::sqrt(norm2);
      for (long k = 0; k < d; ++k) {
        const double delta = v[k] - va.point[k];
        v[k] += -drift * delta + noise_scale * norm * cs.next_gauss();
        bad |= !std::isfinite(v[k]);
      }
    } else {
      for (long k = 0; k < d; ++k) {
        const double delta = v[k] - va.point[k];
        v[k] += -drift * delta + noise_scale * delta * cs.next_gauss();
        bad |= !std::isfinite(v[k]);
      }
    }
    if (bad) {
      long expect = first_bad.load();
      while ((expect == -1 || i < expect) && !first_bad.compare_exchange_weak(expect, i)) {
      }
    }
  });

  const long blown = first_bad.load();
  if (blown >= 0) throw BlowUpError(ens.step_index, blown);
  ens.step_index += 1;
}

}  // namespace cbo
