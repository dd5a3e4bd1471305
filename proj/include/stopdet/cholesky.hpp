#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "stopdet/bounds.hpp"
#include "stopdet/errors.hpp"
#include "stopdet/symmatrix.hpp"

namespace stopdet {

struct Stopped {
  double estimate;   // midpoint of the bounds at the stopping checkpoint
  std::size_t tau;   // rows processed when the conditions fired (< N)
  double lower;
  double upper;
};

struct Completed {
  double log_det;    // 2 sum_j log C_jj over the full factor
  std::size_t rows_processed;
};

using StopOutcome = std::variant<Stopped, Completed>;

inline bool stopped(const StopOutcome& o) { return std::holds_alternative<Stopped>(o); }

// Checkpoint layout for the blocked factorization: bounds are evaluated at
// min(i * block_size, N) for i = 1, 2, ...
struct BlockPlan {
  std::size_t block_size = 0;  // 0 = auto (threads * 64)
  std::size_t threads = 0;     // 0 = hardware concurrency

  std::size_t resolved_threads() const;
  std::size_t resolved_block() const;
  std::vector<std::size_t> checkpoints(std::size_t n) const;
};

// In-place factorization without stopping; the lower triangle of `a`
// receives the factor. Throws FactorizationError on a pivot at or below
// 1e-14 times the largest diagonal entry of the input.
void cholesky_full(SymMatrix& a, const BlockPlan& plan = {});

// 2 sum_j log C_jj. Throws std::invalid_argument on a non-positive diagonal.
double log_det_from_factor(const SymMatrix& c);

// Row-wise factorization with the optional-stopping rule evaluated after
// every diagonal element. On Stopped the matrix holds a valid factor in its
// first tau rows and unspecified content below; it is not restored.
StopOutcome stopped_cholesky_rowwise(SymMatrix& a, const StoppingConfig& cfg,
                                     std::vector<BoundsState>* history = nullptr);

// Blocked left-looking factorization with the stopping rule evaluated once
// per block boundary. Same outcome semantics as the row-wise variant.
StopOutcome stopped_cholesky_blocked(SymMatrix& a, const BlockPlan& plan,
                                     const StoppingConfig& cfg,
                                     std::vector<BoundsState>* history = nullptr);

}  // namespace stopdet
