#pragma once

#include <cstddef>
#include <optional>

namespace stopdet {

// Tail function of the martingale Hoeffding bound, evaluated in log space.
// Strictly decreasing from 1 at x = 0 to 2^-N at x = N; zero for x > N.
double h_n(double x, std::size_t n_total);

// log h_n. The underlying representation: h_n underflows a double once
// log h_n drops below about -709, so monotonicity checks and the inverse
// work on this scale. Returns -infinity for x > N.
double log_h_n(double x, std::size_t n_total);

// Unique x in [0, N] with h_n(x, N) = target, found by bisection; returns N
// when the target lies below 2^-N. Requires target in (0, 1].
double h_n_inverse(double target, std::size_t n_total);

// True when `lower` and `upper` share a nonzero sign and the guaranteed
// relative error (upper - lower) / (2 min(|lower|, |upper|)) is at most r.
bool stop_conditions_hold(double lower, double upper, double r);

// Problem constants for one stopped run; immutable after make_config.
struct StoppingConfig {
  std::size_t n_total = 0;
  double sigma2 = 0.0;
  double delta = 0.0;
  double r = 0.0;
  double kappa_plus = 0.0;
  double kappa_minus = 0.0;  // log(sigma2)
  double c_delta = 0.0;      // (kappa_plus - kappa_minus) * h_n_inverse(delta/2)
  // Targets r >= 1 are accepted but flagged; a run configured this way could
  // stop before it starts, which callers may want to surface.
  bool r_exceeds_unity = false;
};

StoppingConfig make_config(std::size_t n_total, double sigma2, double delta, double r,
                           double kappa_plus);

// Bounds on the final log-determinant after n processed rows with partial
// sum d_n.
struct BoundsState {
  std::size_t n = 0;
  double d_n = 0.0;
  double lower = 0.0;       // d_n + (N-n) kappa_minus
  double upper = 0.0;       // min(upper_prob, upper_det)
  double upper_prob = 0.0;  // d_n + c_delta + (N-n)(d_n + c_delta)/n
  double upper_det = 0.0;   // d_n + (N-n) kappa_plus
};

BoundsState bounds_at(std::size_t n, double d_n, const StoppingConfig& cfg);

// (upper - lower) / (2 min(|lower|, |upper|)) when both bounds share a
// nonzero sign; nullopt when the sign condition fails. Throws when
// lower > upper.
std::optional<double> relative_error_bound(double lower, double upper);

struct StopDecision {
  BoundsState bounds;
  std::optional<double> estimate;  // engaged: stop with the midpoint estimate
  bool stop() const { return estimate.has_value(); }
};

// The per-checkpoint decision: stop with (lower+upper)/2 as soon as both
// bounds share a nonzero sign and the guaranteed relative error is within
// cfg.r. Meant for checkpoints n < N; at n = N the caller already holds the
// exact sum.
StopDecision evaluate_stop(std::size_t n, double d_n, const StoppingConfig& cfg);

}  // namespace stopdet
