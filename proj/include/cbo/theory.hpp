#ifndef CBO_THEORY_HPP
#define CBO_THEORY_HPP

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "cbo/ensemble.hpp"
#include "cbo/objectives.hpp"
#include "cbo/trace.hpp"

// Numerical counterparts of the analytical objects: the energy functional V,
// the compactly supported mollifier phi_r and its derivatives, the
// quantitative Laplace bound, the mass-decay rate q, the horizon T*, the
// alpha threshold, and decay-rate fitting.

namespace cbo::theory {

// Fixed analysis constants. c must satisfy (1-c)^2 <= (2c-1)c; 0.8 does.
struct TheoryConstants {
  double tau = 0.5;
  double epsilon = 1e-3;
  double r = 0.5;
  double c = 0.8;
  double q_laplace = 0.0;
  double q_mass = 0.0;
  double B = 0.0;  // empirical sup_t ||v_alpha - v*||_inf
};

// V(rho_hat) = (1/2N) sum_i ||V_i - v*||_2^2. Equals W_2^2(rho_hat, delta_v*)/2.
double energy_V(const Ensemble& ens, std::span<const double> vstar);

// Tensor-product bump: prod_k exp(1 - r^2/(r^2 - (v-v*)_k^2)) inside the open
// inf-ball of radius r, 0 on and outside its boundary. Range [0, 1].
double mollifier_eval(std::span<const double> v, std::span<const double> vstar, double r);
// d/dv_k and d^2/dv_k^2 of the above (k is 0-based). Both 0 outside the support.
double mollifier_grad_k(std::span<const double> v, std::span<const double> vstar, double r,
                        long k);
double mollifier_hess_kk(std::span<const double> v, std::span<const double> vstar, double r,
                         long k);

// Fraction of active particles with ||V_i - v*||_inf < r.
double ball_mass(const Ensemble& ens, std::span<const double> vstar, double r);

struct LaplaceCheckResult {
  double lhs = 0.0;  // ||v_alpha - v*||_2
  double rhs = 0.0;  // sqrt(d)(q+E_r)^nu/eta + sqrt(d) e^{-alpha q}/mass * mean ||v-v*||_2
  bool holds = false;
};

struct LaplacePreconditionError : std::invalid_argument {
  enum class Kind { RadiusTooLarge, QTooLarge, EmptyBall };
  Kind kind;
  LaplacePreconditionError(Kind k, const std::string& msg)
      : std::invalid_argument(msg), kind(k) {}
};

// Evaluates both sides of the quantitative Laplace bound for the empirical
// measure given by rows [0, n_rows) of positions. values holds the raw
// objective values at those rows. Preconditions: 0 < r <= R0,
// q > 0 with q + E_r <= E_infty, and nonzero ball mass; violations throw
// LaplacePreconditionError with the matching kind.
LaplaceCheckResult laplace_bound_check(const Matrix& positions, long n_rows,
                                       std::span<const double> values, double alpha,
                                       std::span<const double> vstar, double r, double q,
                                       const LandscapeEstimate& est);

// Decay rate of the mass lower bound: q = 2d * max{ lambda(cr + B sqrt(c)) / ((1-c)^2 r)
//   + sigma^2 (c r^2 + B^2)(2c+1) / ((1-c)^4 r^2),  2 lambda^2 / ((2c-1) sigma^2) }.
// sigma must be positive for the rate to be finite.
double mass_decay_rate(double lambda, double sigma, double r, double B, double c, long d);

// T* = log(V0/epsilon) / ((1-tau)(2 lambda - sigma^2)).
double horizon_Tstar(double V0, double epsilon, double tau, double lambda, double sigma);

// alpha_0 = (1/2q)(log d - 2 log mass_T + log(V0/VT) + 2 log((lambda+sigma^2)/(tau(2 lambda - sigma^2)))).
double alpha_threshold(long d, double ball_mass_T, double V0, double VT, double lambda,
                       double sigma, double tau, double q_laplace);

// Forward-difference residual of the differential inequality
//   dV/dt <= -(2 lambda - sigma^2) V + sqrt(2)(lambda + sigma^2) sqrt(V) ||v_a - v*||_2
//            + (sigma^2/2) ||v_a - v*||_2^2;
// entry i covers the step from record i to i+1. Nonpositive entries mean the
// bound holds. Requires a uniform time grid and at least 2 records.
std::vector<double> lemma1_residual(const RunTrace& trace, double lambda, double sigma);

struct DecayFit {
  double rate = 0.0;  // negated slope of the log V regression
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct FitWindow {
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();
  double v_floor = 0.0;  // window ends at the first V <= v_floor
};

// Least squares of log V against t over the window. Requires >= 5 points with
// positive V inside the window.
DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> V,
                        const FitWindow& window);

}  // namespace cbo::theory

#endif
