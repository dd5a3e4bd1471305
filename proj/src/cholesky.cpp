#include "stopdet/cholesky.hpp"

#include <cmath>
#include <stdexcept>

#include "stopdet/parallel.hpp"
#include "stopdet/simd.hpp"

namespace stopdet {

namespace {

constexpr double kPivotFloorScale = 1e-14;

double pivot_floor_for(const SymMatrix& a) {
  return kPivotFloorScale * std::max(a.max_diag(), 0.0);
}

// Factors rows [r0, r1) of the row-major matrix, assuming rows [0, r0) hold
// their final factor values. Panel solve and Schur update are data-parallel
// across rows; the diagonal block is factored sequentially.
void factor_rows(double* a, std::size_t lda, std::size_t r0, std::size_t r1,
                 double pivot_floor, std::size_t threads) {
  // Panel: forward substitution of each row against the finished factor.
  parallel_rows(r0, r1, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      double* ar = a + r * lda;
      for (std::size_t k = 0; k < r0; ++k) {
        const double* ak = a + k * lda;
        ar[k] = (ar[k] - simd::dot(ar, ak, k)) / ak[k];
      }
    }
  });

  // Schur update of the diagonal block (lower triangle only).
  parallel_rows(r0, r1, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      double* ar = a + r * lda;
      for (std::size_t c = r0; c <= r; ++c) {
        ar[c] -= simd::dot(ar, a + c * lda, r0);
      }
    }
  });

  // Unblocked factorization of the diagonal block.
  for (std::size_t j = r0; j < r1; ++j) {
    double* aj = a + j * lda;
    for (std::size_t i = r0; i < j; ++i) {
      const double* ai = a + i * lda;
      aj[i] = (aj[i] - simd::dot(aj + r0, ai + r0, i - r0)) / ai[i];
    }
    const double d = aj[j] - simd::dot(aj + r0, aj + r0, j - r0);
    if (!(d > pivot_floor)) throw FactorizationError(j, d);
    aj[j] = std::sqrt(d);
  }
}

double block_log_sum(const SymMatrix& a, std::size_t r0, std::size_t r1) {
  double acc = 0.0;
  for (std::size_t j = r0; j < r1; ++j) acc += std::log(a.at(j, j));
  return 2.0 * acc;
}

void check_config(const SymMatrix& a, const StoppingConfig& cfg) {
  if (cfg.n_total != a.dim()) {
    throw std::invalid_argument("stopped_cholesky: config N does not match matrix size");
  }
  const double max_log_diag = std::log(a.max_diag());
  if (max_log_diag > cfg.kappa_plus + 1e-9) {
    throw std::invalid_argument(
        "stopped_cholesky: kappa_plus is below the log of the largest diagonal entry");
  }
}

}  // namespace

std::size_t BlockPlan::resolved_threads() const {
  return threads == 0 ? hardware_threads() : threads;
}

std::size_t BlockPlan::resolved_block() const {
  return block_size == 0 ? resolved_threads() * 64 : block_size;
}

std::vector<std::size_t> BlockPlan::checkpoints(std::size_t n) const {
  const std::size_t b = resolved_block();
  std::vector<std::size_t> points;
  for (std::size_t edge = b; edge < n; edge += b) points.push_back(edge);
  points.push_back(n);
  return points;
}

void cholesky_full(SymMatrix& a, const BlockPlan& plan) {
  const std::size_t n = a.dim();
  const double floor = pivot_floor_for(a);
  const std::size_t b = plan.resolved_block();
  const std::size_t threads = plan.resolved_threads();
  for (std::size_t r0 = 0; r0 < n; r0 += b) {
    factor_rows(a.row(0), n, r0, std::min(r0 + b, n), floor, threads);
  }
}

double log_det_from_factor(const SymMatrix& c) {
  double acc = 0.0;
  for (std::size_t j = 0; j < c.dim(); ++j) {
    const double d = c.at(j, j);
    if (!(d > 0.0)) {
      throw std::invalid_argument("log_det_from_factor: non-positive diagonal entry");
    }
    acc += std::log(d);
  }
  return 2.0 * acc;
}

StopOutcome stopped_cholesky_rowwise(SymMatrix& a, const StoppingConfig& cfg,
                                     std::vector<BoundsState>* history) {
  check_config(a, cfg);
  const std::size_t n = a.dim();
  const double floor = pivot_floor_for(a);
  double* base = a.row(0);
  double d_sum = 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    double* aj = base + j * n;
    for (std::size_t k = 0; k < j; ++k) {
      const double* ak = base + k * n;
      aj[k] = (aj[k] - simd::dot(aj, ak, k)) / ak[k];
    }
    const double d = aj[j] - simd::dot(aj, aj, j);
    if (!(d > floor)) throw FactorizationError(j, d);
    aj[j] = std::sqrt(d);
    d_sum += 2.0 * std::log(aj[j]);

    const std::size_t done = j + 1;
    if (done < n) {
      const StopDecision decision = evaluate_stop(done, d_sum, cfg);
      if (history != nullptr) history->push_back(decision.bounds);
      if (decision.stop()) {
        return Stopped{*decision.estimate, done, decision.bounds.lower,
                       decision.bounds.upper};
      }
    } else if (history != nullptr) {
      history->push_back(bounds_at(n, d_sum, cfg));
    }
  }
  return Completed{d_sum, n};
}

StopOutcome stopped_cholesky_blocked(SymMatrix& a, const BlockPlan& plan,
                                     const StoppingConfig& cfg,
                                     std::vector<BoundsState>* history) {
  check_config(a, cfg);
  const std::size_t n = a.dim();
  const double floor = pivot_floor_for(a);
  const std::size_t b = plan.resolved_block();
  const std::size_t threads = plan.resolved_threads();
  double d_sum = 0.0;

  for (std::size_t r0 = 0; r0 < n; r0 += b) {
    const std::size_t r1 = std::min(r0 + b, n);
    factor_rows(a.row(0), n, r0, r1, floor, threads);
    d_sum += block_log_sum(a, r0, r1);

    if (r1 < n) {
      const StopDecision decision = evaluate_stop(r1, d_sum, cfg);
      if (history != nullptr) history->push_back(decision.bounds);
      if (decision.stop()) {
        return Stopped{*decision.estimate, r1, decision.bounds.lower,
                       decision.bounds.upper};
      }
    } else if (history != nullptr) {
      history->push_back(bounds_at(n, d_sum, cfg));
    }
  }
  return Completed{d_sum, n};
}

}  // namespace stopdet
