#include "stopdet/pivoted.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stopdet/errors.hpp"
#include "stopdet/simd.hpp"

namespace stopdet {

namespace {

// Residuals are tracked on A = K + sigma2*I, so exact arithmetic keeps them
// at or above sigma2; values below the floor are roundoff and get lifted.
constexpr double kFloorSlack = 1e-9;

struct Workspace {
  std::vector<double> columns;  // N x cap, row-major by original column index
  std::size_t cap = 0;
  std::size_t n = 0;

  double* col(std::size_t j) { return columns.data() + j * cap; }

  void ensure(std::size_t steps) {
    if (steps <= cap) return;
    std::size_t new_cap = cap == 0 ? 16 : cap;
    while (new_cap < steps) new_cap *= 2;
    if (new_cap > n) new_cap = n;
    std::vector<double> grown(n * new_cap);
    for (std::size_t j = 0; j < n; ++j) {
      const double* src = columns.data() + j * cap;
      std::copy(src, src + cap, grown.data() + j * new_cap);
    }
    columns = std::move(grown);
    cap = new_cap;
  }
};

double sym_entry(const SymMatrix& a, std::size_t i, std::size_t j) {
  return i >= j ? a.at(i, j) : a.at(j, i);
}

}  // namespace

PivotedOutcome pivoted_cholesky(const SymMatrix& a, double sigma2,
                                const PivotedOptions& opts) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("pivoted_cholesky: sigma2 must be positive");
  if (!(opts.diag_tol >= 0.0)) {
    throw std::invalid_argument("pivoted_cholesky: diag_tol must be nonnegative");
  }
  if (opts.config != nullptr && opts.config->n_total != a.dim()) {
    throw std::invalid_argument("pivoted_cholesky: config N does not match matrix size");
  }

  const std::size_t n = a.dim();
  const double kappa_minus = std::log(sigma2);
  const double floor = sigma2 * (1.0 - kFloorSlack);
  const double gross_negative = -1e-6 * std::max(a.max_diag(), 1.0);

  PivotedOutcome out;
  out.pivot_order.reserve(n);

  Workspace ws;
  ws.n = n;

  std::vector<double> residual(n);
  std::vector<std::size_t> order(n);  // first `step` entries are pivots
  for (std::size_t j = 0; j < n; ++j) {
    residual[j] = a.at(j, j);
    order[j] = j;
  }

  double d_sum = 0.0;
  std::size_t step = 0;

  auto record_bounds = [&]() {
    PivotBounds b;
    b.step = step;
    b.d_n = d_sum;
    b.lower = d_sum + static_cast<double>(n - step) * kappa_minus;
    double log_tail = 0.0;
    double max_res = 0.0;
    double min_res = 0.0;
    if (step < n) {
      max_res = residual[order[step]];
      min_res = max_res;
      for (std::size_t idx = step; idx < n; ++idx) {
        const double res = residual[order[idx]];
        log_tail += std::log(res);
        max_res = std::max(max_res, res);
        min_res = std::min(min_res, res);
      }
    }
    b.upper = d_sum + log_tail;
    b.max_residual = max_res;
    b.min_residual = min_res;
    out.history.push_back(b);
  };

  record_bounds();

  while (true) {
    if (step == n) {
      out.reason = PivotStopReason::completed;
      break;
    }
    // Selection: the active entry inducing the most error.
    std::size_t best = step;
    for (std::size_t idx = step + 1; idx < n; ++idx) {
      if (residual[order[idx]] > residual[order[best]]) best = idx;
    }
    const std::size_t pivot = order[best];
    const double pivot_value = residual[pivot];

    if (pivot_value <= opts.diag_tol) {
      out.reason = PivotStopReason::diag_tolerance;
      break;
    }
    if (opts.config != nullptr && step >= 1 &&
        stop_conditions_hold(out.history.back().lower, out.history.back().upper,
                             opts.config->r)) {
      out.reason = PivotStopReason::conditions;
      break;
    }
    if (opts.max_rank != 0 && step == opts.max_rank) {
      out.reason = PivotStopReason::rank_budget;
      break;
    }
    if (!(pivot_value > 0.0)) throw FactorizationError(pivot, pivot_value);

    std::swap(order[step], order[best]);
    ws.ensure(step + 1);

    const double root = std::sqrt(pivot_value);
    const double* pivot_col = ws.col(pivot);
    ws.col(pivot)[step] = root;
    for (std::size_t idx = step + 1; idx < n; ++idx) {
      const std::size_t j = order[idx];
      double* cj = ws.col(j);
      const double value =
          (sym_entry(a, pivot, j) - simd::dot(pivot_col, cj, step)) / root;
      cj[step] = value;
      double res = residual[j] - value * value;
      if (res < floor) {
        if (res < gross_negative) throw FactorizationError(j, res);
        res = floor;
        ++out.clamped_residuals;
      }
      residual[j] = res;
    }
    residual[pivot] = 0.0;  // convention: pivoted entries carry no error
    d_sum += std::log(pivot_value);
    out.pivot_order.push_back(pivot);
    ++step;
    record_bounds();
  }

  out.rank = step;
  out.columns = std::move(ws.columns);
  out.stride = ws.cap;
  const PivotBounds& last = out.history.back();
  out.lower = last.lower;
  out.upper = last.upper;
  out.estimate = 0.5 * (last.lower + last.upper);
  out.log_det = d_sum;
  return out;
}

GuaranteedPrecision guaranteed_precision_at_stop(const PivotedOutcome& outcome) {
  GuaranteedPrecision gp;
  if (outcome.lower == outcome.upper) {
    gp.value = 0.0;
    gp.defined = true;
    return gp;
  }
  const auto bound = relative_error_bound(outcome.lower, outcome.upper);
  if (bound.has_value()) {
    gp.value = *bound;
    gp.defined = true;
  }
  return gp;
}

}  // namespace stopdet
