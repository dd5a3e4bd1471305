#include "stopdet/bounds.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stopdet {

namespace {

// log h_n for 0 <= x <= N. Both terms use the convention 0*log(.) = 0, which
// covers x = 0 and x = N.
double log_h_unchecked(double x, double n) {
  double acc = 0.0;
  if (x < n) acc += (n - x) * std::log(n / (n - x));
  acc += (n + x) * std::log(n / (n + x));
  return 0.5 * acc;
}

void check_h_args(double x, std::size_t n_total) {
  if (!(x >= 0.0)) throw std::invalid_argument("h_n: x must be nonnegative");
  if (n_total == 0) throw std::invalid_argument("h_n: n_total must be positive");
}

}  // namespace

double h_n(double x, std::size_t n_total) {
  check_h_args(x, n_total);
  const double n = static_cast<double>(n_total);
  if (x > n) return 0.0;
  if (x == 0.0) return 1.0;
  return std::exp(log_h_unchecked(x, n));
}

double log_h_n(double x, std::size_t n_total) {
  check_h_args(x, n_total);
  const double n = static_cast<double>(n_total);
  if (x > n) return -std::numeric_limits<double>::infinity();
  if (x == 0.0) return 0.0;
  return log_h_unchecked(x, n);
}

double h_n_inverse(double target, std::size_t n_total) {
  if (!(target > 0.0) || target > 1.0) {
    throw std::invalid_argument("h_n_inverse: target must lie in (0, 1]");
  }
  if (n_total == 0) throw std::invalid_argument("h_n_inverse: n_total must be positive");
  const double n = static_cast<double>(n_total);
  if (target >= 1.0) return 0.0;
  const double log_target = std::log(target);
  if (log_target <= -n * std::numbers::ln2) return n;  // below h_n(N) = 2^-N

  // h_n is continuous and strictly decreasing on [0, N]; plain bisection.
  double lo = 0.0, hi = n;
  const double tol = 1e-12 * n;
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (log_h_unchecked(mid, n) >= log_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

bool stop_conditions_hold(double lower, double upper, double r) {
  if (lower > upper) return false;
  const auto bound = relative_error_bound(lower, upper);
  return bound.has_value() && *bound <= r;
}

StoppingConfig make_config(std::size_t n_total, double sigma2, double delta, double r,
                           double kappa_plus) {
  if (n_total == 0) throw std::invalid_argument("make_config: n_total must be positive");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("make_config: sigma2 must be positive");
  if (!(delta > 0.0) || delta > 1.0) {
    throw std::invalid_argument("make_config: delta must lie in (0, 1]");
  }
  if (!(r > 0.0)) throw std::invalid_argument("make_config: r must be positive");
  const double kappa_minus = std::log(sigma2);
  if (!(kappa_plus > kappa_minus)) {
    throw std::invalid_argument("make_config: kappa_plus must exceed log(sigma2)");
  }
  StoppingConfig cfg;
  cfg.n_total = n_total;
  cfg.sigma2 = sigma2;
  cfg.delta = delta;
  cfg.r = r;
  cfg.kappa_plus = kappa_plus;
  cfg.kappa_minus = kappa_minus;
  cfg.c_delta = (kappa_plus - kappa_minus) * h_n_inverse(0.5 * delta, n_total);
  cfg.r_exceeds_unity = r >= 1.0;
  return cfg;
}

BoundsState bounds_at(std::size_t n, double d_n, const StoppingConfig& cfg) {
  if (n < 1 || n > cfg.n_total) {
    throw std::invalid_argument("bounds_at: n out of range [1, N]");
  }
  const double remaining = static_cast<double>(cfg.n_total - n);
  BoundsState s;
  s.n = n;
  s.d_n = d_n;
  s.lower = d_n + remaining * cfg.kappa_minus;
  s.upper_prob = d_n + cfg.c_delta + remaining * (d_n + cfg.c_delta) / static_cast<double>(n);
  s.upper_det = d_n + remaining * cfg.kappa_plus;
  s.upper = std::min(s.upper_prob, s.upper_det);
  return s;
}

std::optional<double> relative_error_bound(double lower, double upper) {
  if (lower > upper) throw std::invalid_argument("relative_error_bound: lower > upper");
  const bool both_negative = lower < 0.0 && upper < 0.0;
  const bool both_positive = lower > 0.0 && upper > 0.0;
  if (!both_negative && !both_positive) return std::nullopt;
  const double scale = std::min(std::abs(lower), std::abs(upper));
  return (upper - lower) / (2.0 * scale);
}

StopDecision evaluate_stop(std::size_t n, double d_n, const StoppingConfig& cfg) {
  StopDecision decision;
  decision.bounds = bounds_at(n, d_n, cfg);
  if (stop_conditions_hold(decision.bounds.lower, decision.bounds.upper, cfg.r)) {
    decision.estimate = 0.5 * (decision.bounds.lower + decision.bounds.upper);
  }
  return decision;
}

}  // namespace stopdet
