#ifndef CBO_OBJECTIVES_HPP
#define CBO_OBJECTIVES_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cbo {

// Evaluation contract consumed by the dynamics. eval_batch is set when the
// objective depends on a data mini-batch (second argument = sample indices);
// plain benchmark functions leave it empty and dataset_size = 0.
struct Objective {
  long dim = 0;
  std::function<double(std::span<const double>)> eval;
  std::function<double(std::span<const double>, std::span<const int>)> eval_batch;
  std::size_t dataset_size = 0;
  std::optional<std::vector<double>> known_minimizer;
  std::optional<double> known_min_value;

  double operator()(std::span<const double> v) const { return eval(v); }

  // |eval(v*) - E̲| <= 1e-12 * (1 + |E̲|) when both metadata fields are present.
  bool metadata_consistent() const;
};

double sphere(std::span<const double> v);
// sum_k v_k^2 + (5/2)(1 - cos(2 pi v_k)); global minimum 0 at the origin.
double rastrigin(std::span<const double> v);
// Standard constants a=20, b=0.2, c=2*pi.
double ackley(std::span<const double> v);

// name in {"sphere", "rastrigin", "ackley"}; throws on unknown name.
Objective standard_objective(const std::string& name, long d);

// Estimated inverse-continuity constants: ||v - v*||_inf <= (1/eta)(E(v) - E̲)^nu
// near v*, plus the farfield gap E_infty. A sampled estimate, not a certified
// bound.
struct LandscapeEstimate {
  double nu = 0.5;
  double eta = 0.0;
  double E_infty = 0.0;
  double R0 = 0.0;
  // (r, sup of E - E̲ over the closed inf-ball of radius r), nondecreasing in r.
  std::vector<std::pair<double, double>> E_r_profile;

  // Conservative lookup: sup at the smallest tabulated radius >= r.
  double sup_in_ball(double r) const;
};

struct ProbeSpec {
  int inner_samples = 4096;   // random points in the ball B^inf_R0(v*)
  int outer_samples = 4096;   // random points in the search box, outside the ball
  int profile_points = 64;    // radii tabulated in E_r_profile
  double search_lo = -5.12;   // per-coordinate search box for the E_infty estimate
  double search_hi = 5.12;
};

// Fits the largest eta over nu in {1/2, 1/4, 1/8} such that the inner bound
// holds at every probed point, estimates E_infty as the sampled exterior
// infimum, and tabulates the E_r profile. Throws std::runtime_error when no
// candidate nu admits a positive eta on the probe set.
LandscapeEstimate landscape_probe(const Objective& obj, std::span<const double> vstar, double R0,
                                  const ProbeSpec& spec, std::uint64_t seed);

}  // namespace cbo

#endif
