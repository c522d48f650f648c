#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/parallel.hpp"
#include "cbo/rng.hpp"
#include "cbo/theory.hpp"

using namespace cbo;

namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(static_cast<long>(rows.size()), static_cast<long>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.at(static_cast<long>(i), static_cast<long>(j)) = rows[i][j];
  return m;
}

std::vector<int> iota_rows(long n) {
  std::vector<int> r(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = static_cast<int>(i);
  return r;
}

}  // namespace

TEST_CASE("sample_initial: degenerate box is a point mass at zero") {
  const auto ens = sample_initial(InitialLaw::box(0.0, 0.0), 50, 3, 7);
  for (long i = 0; i < ens.active_count; ++i)
    for (long k = 0; k < ens.dim(); ++k) CHECK(ens.positions.at(i, k) == 0.0);
}

TEST_CASE("sample_initial: Gaussian law of large numbers") {
  const long n = 100000;
  const auto ens = sample_initial(InitialLaw::gaussian(0.0, 1.0), n, 2, 123);
  for (long k = 0; k < 2; ++k) {
    double mean = 0.0, var = 0.0;
    for (long i = 0; i < n; ++i) mean += ens.positions.at(i, k);
    mean /= static_cast<double>(n);
    for (long i = 0; i < n; ++i) {
      const double d = ens.positions.at(i, k) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.05);
  }
}

TEST_CASE("sample_initial: errors and determinism") {
  CHECK_THROWS_AS(sample_initial(InitialLaw::gaussian(0, 1), 0, 3, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_initial(InitialLaw::gaussian(0, 1), 3, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_initial(InitialLaw::box(1.0, -1.0), 3, 3, 1), std::invalid_argument);
  const auto a = sample_initial(InitialLaw::gaussian(0, 1), 100, 5, 42);
  const auto b = sample_initial(InitialLaw::gaussian(0, 1), 100, 5, 42);
  CHECK(a.positions.data == b.positions.data);
  const auto c = sample_initial(InitialLaw::gaussian(0, 1), 100, 5, 43);
  CHECK(a.positions.data != c.positions.data);
}

TEST_CASE("consensus_point: single row returns the row") {
  const auto m = from_rows({{1.5, -2.0, 3.25}});
  const std::vector<double> vals = {7.0};
  const auto cp = consensus_point_all(m, 1, vals, 3.0);
  CHECK(cp.point[0] == 1.5);
  CHECK(cp.point[1] == -2.0);
  CHECK(cp.point[2] == 3.25);
}

TEST_CASE("consensus_point: alpha = 0 gives the arithmetic mean") {
  const auto m = from_rows({{0.0}, {2.0}});
  const std::vector<double> vals = {0.0, 4.0};
  const auto cp = consensus_point_all(m, 2, vals, 0.0);
  CHECK(cp.point[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("consensus_point: two-point weight formula, E(v)=v^2, alpha=1") {
  const auto m = from_rows({{0.0}, {1.0}});
  const std::vector<double> vals = {0.0, 1.0};
  const auto cp = consensus_point_all(m, 2, vals, 1.0);
  CHECK(cp.point[0] == doctest::Approx(1.0 / (1.0 + std::exp(1.0))).epsilon(1e-14));
}

TEST_CASE("consensus_point: alpha = 1e15 selects the best row exactly") {
  rng::CounterStream cs(5, rng::Stream::Misc, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const long n = 2 + static_cast<long>(cs.next_below(40));
    Matrix m(n, 3);
    std::vector<double> vals(static_cast<std::size_t>(n));
    long best = 0;
    for (long i = 0; i < n; ++i) {
      for (long k = 0; k < 3; ++k) m.at(i, k) = 2.0 * cs.next_u01() - 1.0;
      // distinct values with a healthy minimum gap
      vals[static_cast<std::size_t>(i)] = cs.next_u01() + 1e-3 * static_cast<double>(i);
      if (vals[static_cast<std::size_t>(i)] < vals[static_cast<std::size_t>(best)]) best = i;
    }
    const auto cp = consensus_point_all(m, n, vals, 1e15);
    for (long k = 0; k < 3; ++k) CHECK(cp.point[static_cast<std::size_t>(k)] == m.at(best, k));
  }
}

TEST_CASE("consensus_point: shift invariance is bitwise") {
  // dyadic values so that adding the constant is exact; the min-shift then
  // reproduces identical weights bit for bit
  rng::CounterStream cs(6, rng::Stream::Misc, 0, 0);
  Matrix m(20, 4);
  std::vector<double> vals(20), shifted(20);
  for (long i = 0; i < 20; ++i) {
    for (long k = 0; k < 4; ++k) m.at(i, k) = cs.next_gauss();
    vals[static_cast<std::size_t>(i)] = 0.25 * static_cast<double>(cs.next_below(64));
    shifted[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)] + 17.25;
  }
  const auto a = consensus_point_all(m, 20, vals, 2.5);
  const auto b = consensus_point_all(m, 20, shifted, 2.5);
  CHECK(a.point == b.point);
}

TEST_CASE("consensus_point: translation equivariance and convex hull") {
  rng::CounterStream cs(7, rng::Stream::Misc, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const long n = 2 + static_cast<long>(cs.next_below(20));
    Matrix m(n, 2), mc(n, 2);
    std::vector<double> vals(static_cast<std::size_t>(n));
    const double c0 = cs.next_gauss(), c1 = cs.next_gauss();
    for (long i = 0; i < n; ++i) {
      m.at(i, 0) = cs.next_gauss();
      m.at(i, 1) = cs.next_gauss();
      mc.at(i, 0) = m.at(i, 0) + c0;
      mc.at(i, 1) = m.at(i, 1) + c1;
      vals[static_cast<std::size_t>(i)] = cs.next_u01();
    }
    const double alpha = 10.0 * cs.next_u01();
    const auto a = consensus_point_all(m, n, vals, alpha);
    const auto b = consensus_point_all(mc, n, vals, alpha);
    CHECK(b.point[0] == doctest::Approx(a.point[0] + c0).epsilon(1e-12));
    CHECK(b.point[1] == doctest::Approx(a.point[1] + c1).epsilon(1e-12));

    for (long k = 0; k < 2; ++k) {
      double lo = m.at(0, k), hi = m.at(0, k);
      for (long i = 1; i < n; ++i) {
        lo = std::min(lo, m.at(i, k));
        hi = std::max(hi, m.at(i, k));
      }
      CHECK(a.point[static_cast<std::size_t>(k)] >= lo - 1e-12);
      CHECK(a.point[static_cast<std::size_t>(k)] <= hi + 1e-12);
    }
  }
}

TEST_CASE("consensus_point: errors") {
  const auto m = from_rows({{1.0}});
  const std::vector<double> none = {};
  const std::vector<int> no_rows = {};
  CHECK_THROWS_AS(consensus_point(m, no_rows, none, 1.0), std::invalid_argument);
  const std::vector<double> bad = {std::nan("")};
  CHECK_THROWS_AS(consensus_point_all(m, 1, bad, 1.0), std::invalid_argument);
}

TEST_CASE("diffusion_term: spec examples") {
  std::vector<double> out(2);
  const std::vector<double> zero = {0.0, 0.0}, z = {0.7, -1.3};
  diffusion_term(zero, Diffusion::Isotropic, z, out);
  CHECK((out[0] == 0.0 && out[1] == 0.0));
  diffusion_term(zero, Diffusion::Anisotropic, z, out);
  CHECK((out[0] == 0.0 && out[1] == 0.0));

  const std::vector<double> d10 = {1.0, 0.0}, zab = {0.4, 0.9};
  diffusion_term(d10, Diffusion::Anisotropic, zab, out);
  CHECK(out[0] == 0.4);
  CHECK(out[1] == 0.0);

  const std::vector<double> d34 = {3.0, 4.0}, z10 = {1.0, 0.0};
  diffusion_term(d34, Diffusion::Isotropic, z10, out);
  CHECK(out[0] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(out[1] == 0.0);

  const std::vector<double> short_z = {1.0};
  CHECK_THROWS_AS(diffusion_term(d34, Diffusion::Isotropic, short_z, out),
                  std::invalid_argument);
}

TEST_CASE("step: sigma = 0 with lambda*dt = 1 lands every particle on v_alpha") {
  auto ens = sample_initial(InitialLaw::box(-4.0, 4.0), 64, 3, 11);
  CboParams p{.lambda = 10.0, .sigma = 0.0, .alpha = 1.0, .dt = 0.1,
              .diffusion = Diffusion::Anisotropic};
  ConsensusPoint va;
  va.point = {0.5, -1.0, 2.0};
  step(ens, p, va);
  for (long i = 0; i < ens.active_count; ++i)
    for (long k = 0; k < 3; ++k)
      CHECK(ens.positions.at(i, k) == va.point[static_cast<std::size_t>(k)]);
  CHECK(ens.step_index == 1);
}

TEST_CASE("step: particle sitting at v_alpha does not move") {
  Ensemble ens;
  ens.positions = from_rows({{1.25, -0.5}});
  ens.active_count = 1;
  ens.seed = 3;
  CboParams p{.lambda = 1.0, .sigma = 2.0, .alpha = 1.0, .dt = 0.05,
              .diffusion = Diffusion::Isotropic};
  ConsensusPoint va;
  va.point = {1.25, -0.5};
  step(ens, p, va);
  CHECK(ens.positions.at(0, 0) == 1.25);
  CHECK(ens.positions.at(0, 1) == -0.5);
}

TEST_CASE("step: matches the update formula with the stream's own noise") {
  for (auto kind : {Diffusion::Anisotropic, Diffusion::Isotropic}) {
    Ensemble ens;
    ens.positions = from_rows({{2.0}});
    ens.active_count = 1;
    ens.seed = 77;
    ens.step_index = 5;
    CboParams p{.lambda = 1.0, .sigma = 0.5, .alpha = 1.0, .dt = 0.1, .diffusion = kind};
    ConsensusPoint va;
    va.point = {1.0};

    rng::CounterStream cs(77, rng::Stream::ParticleNoise, 5, 0);
    const double z = cs.next_gauss();
    // delta = 1, so both kinds give v - lambda*dt*delta + sigma*sqrt(dt)*z
    const double expected = 2.0 - 0.1 * 1.0 + 0.5 * std::sqrt(0.1) * z;
    step(ens, p, va);
    CHECK(ens.positions.at(0, 0) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("step: hand-evaluated update with z = 0.3 style arithmetic") {
  // 2 - 1*0.1*(2-1) + 0.5*sqrt(0.1)*0.3*(2-1) = 1.9474341649025257
  const double v = 2.0 - 0.1 + 0.5 * std::sqrt(0.1) * 0.3;
  CHECK(v == doctest::Approx(1.94743).epsilon(1e-5));
}

TEST_CASE("step: blow-up aborts with the offending step index") {
  Ensemble ens;
  ens.positions = from_rows({{1e308}});
  ens.active_count = 1;
  ens.seed = 1;
  ens.step_index = 42;
  CboParams p{.lambda = 1.0, .sigma = 0.0, .alpha = 1.0, .dt = 1e4,
              .diffusion = Diffusion::Anisotropic};
  ConsensusPoint va;
  va.point = {-1e308};
  try {
    step(ens, p, va);
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(e.step_index == 42);
  }
}

TEST_CASE("step: results do not depend on the worker count") {
  auto a = sample_initial(InitialLaw::gaussian(0, 1), 3000, 4, 99);
  auto b = a;
  CboParams p{.lambda = 1.0, .sigma = 0.4, .alpha = 1.0, .dt = 0.02,
              .diffusion = Diffusion::Anisotropic};
  ConsensusPoint va;
  va.point = {0.1, 0.2, -0.1, 0.0};
  set_thread_count(1);
  step(a, p, va);
  set_thread_count(4);
  step(b, p, va);
  set_thread_count(0);
  CHECK(a.positions.data == b.positions.data);
}

TEST_CASE("one-step contraction: sigma = 0, v_alpha = v*, lambda*dt in (0,1]") {
  rng::CounterStream cs(13, rng::Stream::Misc, 0, 0);
  const std::vector<double> vstar = {0.3, -0.7};
  for (int trial = 0; trial < 25; ++trial) {
    auto ens = sample_initial(InitialLaw::gaussian(0, 2), 200, 2,
                              1000 + static_cast<std::uint64_t>(trial));
    const double ldt = 0.05 + 0.95 * cs.next_u01();  // lambda*dt in (0,1]
    CboParams p{.lambda = ldt / 0.01, .sigma = 0.0, .alpha = 1.0, .dt = 0.01,
                .diffusion = Diffusion::Anisotropic};
    ConsensusPoint va;
    va.point = vstar;
    const double before = theory::energy_V(ens, vstar);
    step(ens, p, va);
    const double after = theory::energy_V(ens, vstar);
    CHECK(after <= before * (1.0 + 1e-12));
  }
}
