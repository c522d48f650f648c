#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cbo/scheduler.hpp"

using namespace cbo;

TEST_CASE("cool: schedule values from the training recipe") {
  Schedule sched;
  sched.alpha_initial = 50.0;
  sched.sigma0 = std::sqrt(0.4);

  const auto e0 = cool(sched, 0);
  CHECK(e0.alpha == 50.0);
  CHECK(e0.sigma == doctest::Approx(std::sqrt(0.4)).epsilon(1e-15));  // log2(2) = 1

  const auto e1 = cool(sched, 1);
  CHECK(e1.alpha == 100.0);

  const auto e2 = cool(sched, 2);
  CHECK(e2.sigma == doctest::Approx(std::sqrt(0.4) / 2.0).epsilon(1e-15));  // log2(4) = 2
}

TEST_CASE("cool: alpha strictly increasing, sigma strictly decreasing") {
  Schedule sched;
  double prev_alpha = 0.0, prev_sigma = 1e300;
  for (int e = 0; e < 12; ++e) {
    const auto st = cool(sched, e);
    CHECK(st.alpha > prev_alpha);
    CHECK(st.sigma < prev_sigma);
    prev_alpha = st.alpha;
    prev_sigma = st.sigma;
  }
  CHECK_THROWS_AS(cool(sched, -1), std::invalid_argument);
}

TEST_CASE("select: epoch blocks are disjoint and cover the dataset") {
  BatchSelector sel(9);
  const long M = 6000;
  const int nE = 60;
  std::set<int> seen;
  for (long s = 0; s < M / nE; ++s) {
    const auto b = sel.select(s, 0, s, M, nE, 500, 100);
    CHECK(static_cast<long>(b.data.size()) == nE);
    for (int i : b.data) {
      CHECK(seen.insert(i).second);  // disjoint across blocks
    }
  }
  CHECK(static_cast<long>(seen.size()) == M);  // full coverage
}

TEST_CASE("select: no duplicates within a step, exhaustive agent batch is a permutation") {
  BatchSelector sel(11);
  const auto b = sel.select(3, 0, 3, 1000, 60, 250, 250);
  std::set<int> agents(b.agents.begin(), b.agents.end());
  CHECK(agents.size() == 250);
  CHECK(*agents.begin() == 0);
  CHECK(*agents.rbegin() == 249);
  std::set<int> data(b.data.begin(), b.data.end());
  CHECK(data.size() == b.data.size());
}

TEST_CASE("select: batch larger than population") {
  BatchSelector sel(1);
  CHECK_THROWS_AS(sel.select(0, 0, 0, 50, 60, 100, 10), std::invalid_argument);
  CHECK_THROWS_AS(sel.select(0, 0, 0, 100, 10, 50, 60), std::invalid_argument);
}

TEST_CASE("select: deterministic given seed and step") {
  BatchSelector a(21), b(21), c(22);
  const auto ba = a.select(5, 1, 5, 600, 60, 300, 40);
  const auto bb = b.select(5, 1, 5, 600, 60, 300, 40);
  CHECK(ba.data == bb.data);
  CHECK(ba.agents == bb.agents);
  const auto bc = c.select(5, 1, 5, 600, 60, 300, 40);
  CHECK(ba.agents != bc.agents);
}

namespace {

Ensemble spread_ensemble(long n, double spread, std::uint64_t seed) {
  auto ens = sample_initial(InitialLaw::box(-spread, spread), n, 3, seed);
  return ens;
}

}  // namespace

TEST_CASE("reduce_particles: no trigger above threshold") {
  auto ens = spread_ensemble(1000, 2.0, 3);
  ReductionPolicy policy{.var_threshold = 1e-6, .shrink_fraction = 0.2, .n_min = 10};
  reduce_particles(ens, policy, 1, true);
  CHECK(ens.active_count == 1000);
}

TEST_CASE("reduce_particles: shrink arithmetic and n_min clamp") {
  auto ens = spread_ensemble(1000, 1e-6, 4);  // tiny variance
  ReductionPolicy policy{.var_threshold = 1.0, .shrink_fraction = 0.2, .n_min = 10};
  reduce_particles(ens, policy, 1, true);
  CHECK(ens.active_count == 800);

  ens.active_count = 10;
  reduce_particles(ens, policy, 2, true);
  CHECK(ens.active_count == 10);  // clamped at n_min
}

TEST_CASE("reduce_particles: disabled policy and non-boundary are no-ops") {
  auto ens = spread_ensemble(100, 1e-6, 5);
  ReductionPolicy off{.var_threshold = 1.0, .shrink_fraction = 0.0, .n_min = 2};
  reduce_particles(ens, off, 1, true);
  CHECK(ens.active_count == 100);
  ReductionPolicy on{.var_threshold = 1.0, .shrink_fraction = 0.5, .n_min = 2};
  reduce_particles(ens, on, 1, false);
  CHECK(ens.active_count == 100);
}

TEST_CASE("reduce_particles: survivors are a subset in original order") {
  auto ens = spread_ensemble(50, 1e-9, 6);
  std::vector<double> before(ens.positions.data);
  ReductionPolicy policy{.var_threshold = 1.0, .shrink_fraction = 0.3, .n_min = 2};
  reduce_particles(ens, policy, 7, true);
  CHECK(ens.active_count == 35);
  // every surviving row existed before, and relative order is preserved
  long cursor = 0;
  for (long i = 0; i < ens.active_count; ++i) {
    bool found = false;
    for (long j = cursor; j < 50; ++j) {
      bool same = true;
      for (long k = 0; k < 3; ++k)
        same &= (ens.positions.at(i, k) == before[static_cast<std::size_t>(j) * 3 + k]);
      if (same) {
        cursor = j + 1;
        found = true;
        break;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("position_variance_trace: hand value") {
  Ensemble ens;
  ens.positions = Matrix(2, 1);
  ens.positions.at(0, 0) = -1.0;
  ens.positions.at(1, 0) = 1.0;
  ens.active_count = 2;
  CHECK(position_variance_trace(ens) == doctest::Approx(1.0).epsilon(1e-15));
}
