#include "cbo/theory.hpp"

#include <cmath>
#include <limits>

namespace cbo::theory {

double energy_V(const Ensemble& ens, std::span<const double> vstar) {
  const long d = ens.dim();
  if (static_cast<long>(vstar.size()) != d)
    throw std::invalid_argument("energy_V: dimension mismatch");
  double acc = 0.0;
  for (long i = 0; i < ens.active_count; ++i) {
    const double* v = ens.positions.row(i);
    for (long k = 0; k < d; ++k) {
      const double diff = v[k] - vstar[k];
      acc += diff * diff;
    }
  }
  return 0.5 * acc / static_cast<double>(ens.active_count);
}

double mollifier_eval(std::span<const double> v, std::span<const double> vstar, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("mollifier: r must be > 0");
  const double r2 = r * r;
  double log_val = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double dk = v[k] - vstar[k];
    const double gap = r2 - dk * dk;
    if (!(gap > 0.0)) return 0.0;
    log_val += 1.0 - r2 / gap;
  }
  return std::exp(log_val);
}

double mollifier_grad_k(std::span<const double> v, std::span<const double> vstar, double r,
                        long k) {
  const double phi = mollifier_eval(v, vstar, r);
  if (phi == 0.0) return 0.0;
  const double r2 = r * r;
  const double dk = v[static_cast<std::size_t>(k)] - vstar[static_cast<std::size_t>(k)];
  const double gap = r2 - dk * dk;
  return -2.0 * r2 * dk / (gap * gap) * phi;
}

double mollifier_hess_kk(std::span<const double> v, std::span<const double> vstar, double r,
                         long k) {
  const double phi = mollifier_eval(v, vstar, r);
  if (phi == 0.0) return 0.0;
  const double r2 = r * r;
  const double dk = v[static_cast<std::size_t>(k)] - vstar[static_cast<std::size_t>(k)];
  const double dk2 = dk * dk;
  const double gap = r2 - dk2;
  const double num = 2.0 * (2.0 * dk2 - r2) * dk2 - gap * gap;
  return 2.0 * r2 * num / (gap * gap * gap * gap) * phi;
}

double ball_mass(const Ensemble& ens, std::span<const double> vstar, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("ball_mass: r must be > 0");
  const long d = ens.dim();
  long inside = 0;
  for (long i = 0; i < ens.active_count; ++i) {
    const double* v = ens.positions.row(i);
    bool in = true;
    for (long k = 0; k < d; ++k) {
      if (std::abs(v[k] - vstar[k]) >= r) {
        in = false;
        break;
      }
    }
    inside += in;
  }
  return static_cast<double>(inside) / static_cast<double>(ens.active_count);
}

LaplaceCheckResult laplace_bound_check(const Matrix& positions, long n_rows,
                                       std::span<const double> values, double alpha,
                                       std::span<const double> vstar, double r, double q,
                                       const LandscapeEstimate& est) {
  using Kind = LaplacePreconditionError::Kind;
  if (!(r > 0.0) || r > est.R0 * (1.0 + 1e-12))
    throw LaplacePreconditionError(Kind::RadiusTooLarge, "laplace_bound_check: need 0 < r <= R0");
  const double e_r = est.sup_in_ball(r);
  if (!(q > 0.0) || q + e_r > est.E_infty)
    throw LaplacePreconditionError(Kind::QTooLarge,
                                   "laplace_bound_check: need q > 0 with q + E_r <= E_infty");

  const long d = positions.cols;
  long inside = 0;
  double mean_dist2 = 0.0;
  for (long i = 0; i < n_rows; ++i) {
    const double* v = positions.row(i);
    double norm2 = 0.0;
    bool in = true;
    for (long k = 0; k < d; ++k) {
      const double diff = v[k] - vstar[k];
      norm2 += diff * diff;
      if (std::abs(diff) >= r) in = false;
    }
    inside += in;
    mean_dist2 += std::sqrt(norm2);
  }
  mean_dist2 /= static_cast<double>(n_rows);
  const double mass = static_cast<double>(inside) / static_cast<double>(n_rows);
  if (mass <= 0.0)
    throw LaplacePreconditionError(Kind::EmptyBall, "laplace_bound_check: empty ball");

  const ConsensusPoint cp = consensus_point_all(positions, n_rows, values, alpha);
  double lhs2 = 0.0;
  for (long k = 0; k < d; ++k) {
    const double diff = cp.point[static_cast<std::size_t>(k)] - vstar[static_cast<std::size_t>(k)];
    lhs2 += diff * diff;
  }

  LaplaceCheckResult res;
  res.lhs = std::sqrt(lhs2);
  const double sqrt_d = std::sqrt(static_cast<double>(d));
  res.rhs = sqrt_d * std::pow(q + e_r, est.nu) / est.eta +
            sqrt_d * std::exp(-alpha * q) / mass * mean_dist2;
  res.holds = res.lhs <= res.rhs;
  return res;
}

double mass_decay_rate(double lambda, double sigma, double r, double B, double c, long d) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("mass_decay_rate: sigma must be > 0 for a finite rate");
  if (!(c > 0.5 && c < 1.0)) throw std::invalid_argument("mass_decay_rate: c must be in (1/2,1)");
  if ((1.0 - c) * (1.0 - c) > (2.0 * c - 1.0) * c)
    throw std::invalid_argument("mass_decay_rate: c must satisfy (1-c)^2 <= (2c-1)c");
  if (!(r > 0.0)) throw std::invalid_argument("mass_decay_rate: r must be > 0");
  if (!(B >= 0.0)) throw std::invalid_argument("mass_decay_rate: B must be >= 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("mass_decay_rate: lambda must be > 0");

  const double omc = 1.0 - c;
  const double drift_part = lambda * (c * r + B * std::sqrt(c)) / (omc * omc * r);
  const double diff_part =
      sigma * sigma * (c * r * r + B * B) * (2.0 * c + 1.0) / (omc * omc * omc * omc * r * r);
  const double alt = 2.0 * lambda * lambda / ((2.0 * c - 1.0) * sigma * sigma);
  return 2.0 * static_cast<double>(d) * std::max(drift_part + diff_part, alt);
}

double horizon_Tstar(double V0, double epsilon, double tau, double lambda, double sigma) {
  if (!(2.0 * lambda > sigma * sigma))
    throw std::invalid_argument("horizon_Tstar: need 2*lambda > sigma^2");
  if (!(epsilon > 0.0) || epsilon > V0)
    throw std::invalid_argument("horizon_Tstar: need 0 < epsilon <= V0");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("horizon_Tstar: tau must be in (0,1)");
  return std::log(V0 / epsilon) / ((1.0 - tau) * (2.0 * lambda - sigma * sigma));
}

double alpha_threshold(long d, double ball_mass_T, double V0, double VT, double lambda,
                       double sigma, double tau, double q_laplace) {
  if (!(ball_mass_T > 0.0 && ball_mass_T <= 1.0))
    throw std::invalid_argument("alpha_threshold: ball mass must be in (0,1]");
  if (!(2.0 * lambda > sigma * sigma))
    throw std::invalid_argument("alpha_threshold: need 2*lambda > sigma^2");
  if (!(VT > 0.0) || VT > V0) throw std::invalid_argument("alpha_threshold: need 0 < VT <= V0");
  if (!(q_laplace > 0.0)) throw std::invalid_argument("alpha_threshold: q must be > 0");
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("alpha_threshold: tau must be in (0,1)");

  const double s2 = sigma * sigma;
  return (std::log(static_cast<double>(d)) - 2.0 * std::log(ball_mass_T) + std::log(V0 / VT) +
          2.0 * std::log((lambda + s2) / (tau * (2.0 * lambda - s2)))) /
         (2.0 * q_laplace);
}

std::vector<double> lemma1_residual(const RunTrace& trace, double lambda, double sigma) {
  const auto& s = trace.steps;
  if (s.size() < 2) throw std::invalid_argument("lemma1_residual: need at least 2 records");
  const double dt = s[1].t - s[0].t;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    if (std::abs((s[i + 1].t - s[i].t) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("lemma1_residual: non-uniform time grid");
  }
  const double s2 = sigma * sigma;
  std::vector<double> residual(s.size() - 1);
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double V = s[i].V;
    const double dist = s[i].dist_2;
    const double bound =
        -(2.0 * lambda - s2) * V + std::sqrt(2.0) * (lambda + s2) * std::sqrt(V) * dist +
        0.5 * s2 * dist * dist;
    residual[i] = (s[i + 1].V - V) / dt - bound;
  }
  return residual;
}

DecayFit fit_decay_rate(std::span<const double> t, std::span<const double> V,
                        const FitWindow& window) {
  if (t.size() != V.size()) throw std::invalid_argument("fit_decay_rate: size mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_min) continue;
    if (t[i] > window.t_max) break;
    if (V[i] <= window.v_floor) break;  // window ends at the first crossing
    if (!(V[i] > 0.0)) throw std::invalid_argument("fit_decay_rate: nonpositive V in window");
    xs.push_back(t[i]);
    ys.push_back(std::log(V[i]));
  }
  if (xs.size() < 5) throw std::invalid_argument("fit_decay_rate: fewer than 5 points in window");

  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_decay_rate: degenerate time values");
  const double slope = sxy / sxx;

  DecayFit fit;
  fit.rate = -slope;
  fit.intercept = my - slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace cbo::theory
