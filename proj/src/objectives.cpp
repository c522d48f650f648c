#include "cbo/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "cbo/rng.hpp"

namespace cbo {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

bool Objective::metadata_consistent() const {
  if (!known_minimizer || !known_min_value) return true;
  const double at_min = eval(*known_minimizer);
  return std::abs(at_min - *known_min_value) <= 1e-12 * (1.0 + std::abs(*known_min_value));
}

double sphere(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double rastrigin(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x + 2.5 * (1.0 - std::cos(kTwoPi * x));
  return s;
}

double ackley(std::span<const double> v) {
  const double a = 20.0, b = 0.2;
  const double d = static_cast<double>(v.size());
  double sq = 0.0, cs = 0.0;
  for (double x : v) {
    sq += x * x;
    cs += std::cos(kTwoPi * x);
  }
  return -a * std::exp(-b * std::sqrt(sq / d)) - std::exp(cs / d) + a + std::numbers::e;
}

Objective standard_objective(const std::string& name, long d) {
  if (d < 1) throw std::invalid_argument("standard_objective: d must be >= 1");
  Objective obj;
  obj.dim = d;
  if (name == "sphere") {
    obj.eval = [](std::span<const double> v) { return sphere(v); };
  } else if (name == "rastrigin") {
    obj.eval = [](std::span<const double> v) { return rastrigin(v); };
  } else if (name == "ackley") {
    obj.eval = [](std::span<const double> v) { return ackley(v); };
  } else {
    throw std::invalid_argument("standard_objective: unknown name '" + name + "'");
  }
  obj.known_minimizer = std::vector<double>(static_cast<std::size_t>(d), 0.0);
  obj.known_min_value = 0.0;
  return obj;
}

double LandscapeEstimate::sup_in_ball(double r) const {
  for (const auto& [rr, sup] : E_r_profile) {
    if (rr >= r) return sup;
  }
  if (!E_r_profile.empty() && r <= R0 * (1.0 + 1e-12)) return E_r_profile.back().second;
  throw std::out_of_range("LandscapeEstimate: radius beyond tabulated profile");
}

namespace {

double inf_dist(std::span<const double> v, std::span<const double> c) {
  double m = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) m = std::max(m, std::abs(v[k] - c[k]));
  return m;
}

}  // namespace

LandscapeEstimate landscape_probe(const Objective& obj, std::span<const double> vstar, double R0,
                                  const ProbeSpec& spec, std::uint64_t seed) {
  if (!(R0 > 0.0)) throw std::invalid_argument("landscape_probe: R0 must be > 0");
  if (static_cast<long>(vstar.size()) != obj.dim)
    throw std::invalid_argument("landscape_probe: v* dimension mismatch");
  const long d = obj.dim;
  const double e_floor = obj.known_min_value ? *obj.known_min_value : obj.eval(vstar);

  // Inner probe set: random points in the ball plus axis points and corners at
  // each profile radius, so the tabulated sups are tight where it matters.
  std::vector<std::vector<double>> inner;
  rng::CounterStream cs(seed, rng::Stream::Probe, 0, 0);
  std::vector<double> pt(static_cast<std::size_t>(d));
  for (int s = 0; s < spec.inner_samples; ++s) {
    for (long k = 0; k < d; ++k)
      pt[static_cast<std::size_t>(k)] = vstar[k] + R0 * (2.0 * cs.next_u01() - 1.0);
    inner.push_back(pt);
  }
  for (int j = 1; j <= spec.profile_points; ++j) {
    const double r = R0 * static_cast<double>(j) / spec.profile_points;
    for (long k = 0; k < d; ++k) {
      for (double sgn : {-1.0, 1.0}) {
        pt.assign(vstar.begin(), vstar.end());
        pt[static_cast<std::size_t>(k)] += sgn * r;
        inner.push_back(pt);
      }
    }
    if (d <= 8) {
      for (long mask = 0; mask < (1L << d); ++mask) {
        for (long k = 0; k < d; ++k)
          pt[static_cast<std::size_t>(k)] = vstar[k] + ((mask >> k) & 1 ? r : -r);
        inner.push_back(pt);
      }
    } else {
      for (double sgn : {-1.0, 1.0}) {
        for (long k = 0; k < d; ++k) pt[static_cast<std::size_t>(k)] = vstar[k] + sgn * r;
        inner.push_back(pt);
      }
    }
  }

  // (inf-distance, shifted value) pairs, sorted for the running-sup profile.
  std::vector<std::pair<double, double>> dist_val;
  dist_val.reserve(inner.size());
  for (const auto& v : inner) {
    const double e = obj.eval(v) - e_floor;
    if (!std::isfinite(e)) throw std::runtime_error("landscape_probe: non-finite objective value");
    dist_val.emplace_back(inf_dist(v, vstar), e);
  }
  std::sort(dist_val.begin(), dist_val.end());

  // Largest eta per candidate nu; the winner maximizes eta (ties -> larger nu).
  const double nu_candidates[] = {0.5, 0.25, 0.125};
  double best_eta = 0.0, best_nu = 0.0;
  for (double nu : nu_candidates) {
    double eta = std::numeric_limits<double>::infinity();
    for (const auto& [dist, e] : dist_val) {
      if (dist <= 0.0) continue;
      eta = std::min(eta, std::pow(std::max(e, 0.0), nu) / dist);
    }
    if (std::isfinite(eta) && eta > best_eta) {
      best_eta = eta;
      best_nu = nu;
    }
  }
  if (!(best_eta > 0.0))
    throw std::runtime_error("landscape_probe: inner bound unsatisfiable at all candidate nu");

  LandscapeEstimate est;
  est.nu = best_nu;
  est.eta = best_eta;
  est.R0 = R0;

  est.E_r_profile.reserve(static_cast<std::size_t>(spec.profile_points));
  std::size_t cursor = 0;
  double running_sup = 0.0;
  for (int j = 1; j <= spec.profile_points; ++j) {
    const double r = R0 * static_cast<double>(j) / spec.profile_points;
    while (cursor < dist_val.size() && dist_val[cursor].first <= r * (1.0 + 1e-12)) {
      running_sup = std::max(running_sup, dist_val[cursor].second);
      ++cursor;
    }
    est.E_r_profile.emplace_back(r, running_sup);
  }

  // Exterior infimum: random box points outside the ball, plus points just
  // outside each ball face where the infimum typically sits.
  if (spec.search_hi - spec.search_lo <= 0.0)
    throw std::invalid_argument("landscape_probe: degenerate search box");
  double e_inf = std::numeric_limits<double>::infinity();
  const double face = R0 * (1.0 + 1e-9);
  for (long k = 0; k < d; ++k) {
    for (double sgn : {-1.0, 1.0}) {
      pt.assign(vstar.begin(), vstar.end());
      pt[static_cast<std::size_t>(k)] += sgn * face;
      e_inf = std::min(e_inf, obj.eval(pt) - e_floor);
    }
  }
  int accepted = 0, attempts = 0;
  const int max_attempts = spec.outer_samples * 64;
  while (accepted < spec.outer_samples && attempts < max_attempts) {
    ++attempts;
    for (long k = 0; k < d; ++k)
      pt[static_cast<std::size_t>(k)] =
          spec.search_lo + (spec.search_hi - spec.search_lo) * cs.next_u01();
    if (inf_dist(pt, vstar) <= R0) continue;
    ++accepted;
    e_inf = std::min(e_inf, obj.eval(pt) - e_floor);
  }
  if (!(e_inf > 0.0))
    throw std::runtime_error("landscape_probe: no farfield gap on the probe set (A2 fails)");
  est.E_infty = e_inf;
  return est;
}

}  // namespace cbo
