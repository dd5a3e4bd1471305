#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stopdet/kernels.hpp"
#include "stopdet/pointset.hpp"
#include "stopdet/symmatrix.hpp"

// Brute-force reference computations for tests and acceptance runs. These
// deliberately avoid the Cholesky code paths: the log-determinant reference
// goes through a symmetric eigendecomposition and the posterior-variance
// reference through an LU solve.

namespace stopdet::oracle {

// Eigenvalues of a symmetric matrix (lower triangle read), unsorted.
// Householder tridiagonalization followed by implicit-shift QL.
std::vector<double> sym_eigenvalues(const SymMatrix& a);

// Sum of log eigenvalues. Throws std::invalid_argument on a non-positive
// eigenvalue.
double logdet_reference(const SymMatrix& a);

// Posterior variance of a Gaussian process at x given noisy observations at
// the prefix points: k(x,x) + sigma2 - k_x^T (K + sigma2 I)^-1 k_x, solved
// densely with partial pivoting. An empty prefix yields k(x,x) + sigma2.
double gp_posterior_variance(const PointSet& prefix, std::span<const double> x,
                             const KernelSpec& spec, double sigma2);

struct DecreasingExpectationReport {
  bool pass = false;
  std::size_t trials = 0;
  std::vector<double> means;  // sample mean of f_j per index j
  // Largest value of mean(f_{j+1}-f_j) - 3*SE over adjacent pairs; the check
  // passes when this is <= 0. Per-realization monotonicity is not asserted.
  double worst_excess = 0.0;
};

// Monte-Carlo check that the f_j = 2 log C_jj decrease in expectation for
// i.i.d. inputs. Points are drawn i.i.d. Gaussian scaled by point_spread;
// a spread of zero collapses the law to a point mass.
DecreasingExpectationReport check_decreasing_expectation(const KernelSpec& spec,
                                                         double sigma2, std::size_t n,
                                                         std::size_t dim,
                                                         std::size_t trials,
                                                         std::uint64_t seed,
                                                         double point_spread = 1.0);

struct TrialRecord {
  std::uint64_t seed = 0;
  std::size_t tau = 0;
  bool stopped = false;
  double estimate = 0.0;
  double reference = 0.0;
  double rel_error = 0.0;
};

struct GuaranteeReport {
  std::size_t trials = 0;
  std::size_t failures = 0;     // rel_error > r
  double failure_rate = 0.0;
  double binom_upper95 = 0.0;   // one-sided 95% upper confidence bound
  std::size_t stopped_count = 0;
  std::vector<TrialRecord> records;
};

// Which stopped factorization the guarantee trial exercises. The blocked
// variant's coarser checkpoint set is still a valid stopping time, so both
// must satisfy the same bound.
enum class GuaranteeVariant { rowwise, blocked };

// Repeatedly draws fresh i.i.d. Gaussian inputs, runs the stopped
// factorization, and compares the returned estimate against the
// eigendecomposition reference. Completed runs count as exact.
GuaranteeReport check_guarantee(const KernelSpec& spec, double sigma2, double delta,
                                double r, std::size_t n, std::size_t dim,
                                std::size_t trials, std::uint64_t seed,
                                std::size_t threads = 0,
                                GuaranteeVariant variant = GuaranteeVariant::rowwise);

// One-sided upper 95% Clopper-Pearson bound on a binomial proportion.
double binomial_upper95(std::size_t failures, std::size_t trials);

}  // namespace stopdet::oracle
