#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stopdet/bounds.hpp"
#include "stopdet/symmatrix.hpp"

namespace stopdet {

// Why the run ended.
enum class PivotStopReason {
  completed,        // all N pivots processed
  diag_tolerance,   // max remaining residual <= diag_tol
  conditions,       // shared sign + relative-precision conditions fired
  rank_budget,      // max_rank pivots processed
};

// Bounds on the final log-determinant after `step` pivots, plus the residual
// extremes over the still-active diagonal.
struct PivotBounds {
  std::size_t step = 0;
  double d_n = 0.0;
  double lower = 0.0;  // d_n + (N-step) * log(sigma2)
  double upper = 0.0;  // d_n + sum of logs of remaining residuals
  double max_residual = 0.0;
  double min_residual = 0.0;
};

struct PivotedOutcome {
  std::size_t rank = 0;               // pivots processed (S)
  PivotStopReason reason = PivotStopReason::completed;
  std::vector<std::size_t> pivot_order;  // original indices, selection order
  // Factor stored per original column: column(j) holds the first `rank`
  // entries of row j of L^T, i.e. factor_col(j)[s] = L(s, j) in pivot order.
  std::vector<PivotBounds> history;   // entry per step, including step 0
  double log_det = 0.0;               // exact when reason == completed
  double estimate = 0.0;              // midpoint of the final bounds
  double lower = 0.0;
  double upper = 0.0;
  std::size_t clamped_residuals = 0;  // residuals lifted to the sigma2 floor

  std::span<const double> factor_col(std::size_t j) const {
    return {columns.data() + j * stride, rank};
  }

  std::vector<double> columns;  // N x stride, row-major over original index
  std::size_t stride = 0;
};

struct PivotedOptions {
  double diag_tol = 0.0;               // stop when max residual <= diag_tol
  const StoppingConfig* config = nullptr;  // enables the shared stop conditions
  std::size_t max_rank = 0;            // 0 = no budget (up to N)
};

// Cholesky decomposition with full pivoting on A = K + sigma2 I: each step
// processes the largest remaining residual diagonal entry. Runs in
// O(N * S^2) for S steps and materializes only S factor rows.
PivotedOutcome pivoted_cholesky(const SymMatrix& a, double sigma2,
                                const PivotedOptions& opts);

struct GuaranteedPrecision {
  double value = 1.0;   // sentinel when the sign condition fails
  bool defined = false;
};

// Relative precision on the log-determinant certified by the bounds at the
// stopping step.
GuaranteedPrecision guaranteed_precision_at_stop(const PivotedOutcome& outcome);

}  // namespace stopdet
