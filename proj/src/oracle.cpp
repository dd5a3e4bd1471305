#include "stopdet/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stopdet/cholesky.hpp"
#include "stopdet/data.hpp"
#include "stopdet/parallel.hpp"
#include "stopdet/rng.hpp"

namespace stopdet::oracle {

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form (diagonal
// d, subdiagonal e). Reads and destroys the lower triangle.
void tridiagonalize(std::vector<double>& z, std::size_t n, std::vector<double>& d,
                    std::vector<double>& e) {
  auto at = [&](std::size_t r, std::size_t c) -> double& { return z[r * n + c]; };
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t l = i - 1;
    double h = 0.0;
    double scale = 0.0;
    if (l > 0) {
      for (std::size_t k = 0; k <= l; ++k) scale += std::abs(at(i, k));
      if (scale == 0.0) {
        e[i] = at(i, l);
      } else {
        for (std::size_t k = 0; k <= l; ++k) {
          at(i, k) /= scale;
          h += at(i, k) * at(i, k);
        }
        double f = at(i, l);
        const double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        at(i, l) = f - g;
        f = 0.0;
        for (std::size_t j = 0; j <= l; ++j) {
          double acc = 0.0;
          for (std::size_t k = 0; k <= j; ++k) acc += at(j, k) * at(i, k);
          for (std::size_t k = j + 1; k <= l; ++k) acc += at(k, j) * at(i, k);
          e[j] = acc / h;
          f += e[j] * at(i, j);
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j <= l; ++j) {
          f = at(i, j);
          const double g2 = e[j] - hh * f;
          e[j] = g2;
          for (std::size_t k = 0; k <= j; ++k) at(j, k) -= f * e[k] + g2 * at(i, k);
        }
      }
    } else {
      e[i] = at(i, l);
    }
    d[i] = h;
  }
  e[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
}

// Implicit-shift QL iteration on a tridiagonal matrix; eigenvalues land in d.
// Deflation combines the local pair scale with the matrix norm: each sweep's
// rotations pass through the large rows and reinject absolute noise of order
// eps * ||T||, so subdiagonal entries inside a cluster of nearly identical
// eigenvalues (kernel matrices pile hundreds up at sigma2) stagnate near that
// floor and a purely local threshold never deflates them.
void ql_eigenvalues(std::vector<double>& d, std::vector<double>& e, std::size_t n) {
  if (n == 1) return;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  double anorm = 0.0;  // Gershgorin bound on ||T||
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(d[i]) + std::abs(e[i]);
    if (i > 0) row += std::abs(e[i - 1]);
    anorm = std::max(anorm, row);
  }
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * (dd + anorm)) break;
      }
      if (m != l) {
        if (iter++ == 50) {
          throw std::runtime_error("sym_eigenvalues: QL iteration did not converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(m) - 1;
             i >= static_cast<std::ptrdiff_t>(l); --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

std::vector<double> sym_eigenvalues(const SymMatrix& a) {
  const std::size_t n = a.dim();
  std::vector<double> z(a.storage());
  std::vector<double> d, e;
  tridiagonalize(z, n, d, e);
  ql_eigenvalues(d, e, n);
  return d;
}

double logdet_reference(const SymMatrix& a) {
  double acc = 0.0;
  for (const double lambda : sym_eigenvalues(a)) {
    if (!(lambda > 0.0)) {
      throw std::invalid_argument("logdet_reference: non-positive eigenvalue");
    }
    acc += std::log(lambda);
  }
  return acc;
}

double gp_posterior_variance(const PointSet& prefix, std::span<const double> x,
                             const KernelSpec& spec, double sigma2) {
  validate(spec);
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("gp_posterior_variance: sigma2 must be positive");
  }
  const double prior = kernel_eval(spec, x, x) + sigma2;
  const std::size_t m = prefix.size();
  if (m == 0) return prior;

  // Dense LU with partial pivoting on K_prefix + sigma2 I.
  std::vector<double> mat(m * m);
  std::vector<double> rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      mat[i * m + j] = kernel_eval(spec, prefix.row(i), prefix.row(j));
    }
    mat[i * m + i] += sigma2;
    rhs[i] = kernel_eval(spec, prefix.row(i), x);
  }
  const std::vector<double> cov(rhs);

  std::vector<std::size_t> piv(m);
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t best = col;
    for (std::size_t r = col + 1; r < m; ++r) {
      if (std::abs(mat[r * m + col]) > std::abs(mat[best * m + col])) best = r;
    }
    piv[col] = best;
    if (best != col) {
      for (std::size_t c = 0; c < m; ++c) std::swap(mat[col * m + c], mat[best * m + c]);
      std::swap(rhs[col], rhs[best]);
    }
    const double pivot = mat[col * m + col];
    if (pivot == 0.0) {
      throw std::runtime_error("gp_posterior_variance: singular system");
    }
    for (std::size_t r = col + 1; r < m; ++r) {
      const double factor = mat[r * m + col] / pivot;
      if (factor == 0.0) continue;
      mat[r * m + col] = factor;
      for (std::size_t c = col + 1; c < m; ++c) mat[r * m + c] -= factor * mat[col * m + c];
      rhs[r] -= factor * rhs[col];
    }
  }
  for (std::size_t col = m; col-- > 0;) {
    for (std::size_t c = col + 1; c < m; ++c) rhs[col] -= mat[col * m + c] * rhs[c];
    rhs[col] /= mat[col * m + col];
  }

  double quad = 0.0;
  for (std::size_t i = 0; i < m; ++i) quad += cov[i] * rhs[i];
  return prior - quad;
}

DecreasingExpectationReport check_decreasing_expectation(const KernelSpec& spec,
                                                         double sigma2, std::size_t n,
                                                         std::size_t dim,
                                                         std::size_t trials,
                                                         std::uint64_t seed,
                                                         double point_spread) {
  if (n == 0 || dim == 0 || trials == 0) {
    throw std::invalid_argument("check_decreasing_expectation: n, dim, trials must be positive");
  }
  std::vector<double> mean_f(n, 0.0);
  std::vector<double> diff_sum(n > 1 ? n - 1 : 0, 0.0);
  std::vector<double> diff_sq(n > 1 ? n - 1 : 0, 0.0);

  std::vector<double> f(n);
  for (std::size_t t = 0; t < trials; ++t) {
    Dataset ds = synth_gaussian(n, dim, derive_seed(seed, t));
    if (point_spread != 1.0) {
      for (double& v : ds.points.values()) v *= point_spread;
    }
    SymMatrix a = assemble_matrix(ds.points, spec, sigma2);
    cholesky_full(a);
    for (std::size_t j = 0; j < n; ++j) {
      f[j] = 2.0 * std::log(a.at(j, j));
      mean_f[j] += f[j];
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double diff = f[j + 1] - f[j];
      diff_sum[j] += diff;
      diff_sq[j] += diff * diff;
    }
  }

  DecreasingExpectationReport report;
  report.trials = trials;
  report.means.resize(n);
  for (std::size_t j = 0; j < n; ++j) report.means[j] = mean_f[j] / trials;

  double worst = n > 1 ? -std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double mean_diff = diff_sum[j] / trials;
    double var = 0.0;
    if (trials > 1) {
      var = std::max(0.0, (diff_sq[j] - trials * mean_diff * mean_diff) / (trials - 1.0));
    }
    const double se = std::sqrt(var / trials);
    worst = std::max(worst, mean_diff - 3.0 * se);
  }
  report.worst_excess = worst;
  report.pass = worst <= 0.0;
  return report;
}

GuaranteeReport check_guarantee(const KernelSpec& spec, double sigma2, double delta,
                                double r, std::size_t n, std::size_t dim,
                                std::size_t trials, std::uint64_t seed,
                                std::size_t threads, GuaranteeVariant variant) {
  if (trials == 0) throw std::invalid_argument("check_guarantee: trials must be positive");
  const double kplus = kappa_plus(spec, sigma2);
  const StoppingConfig cfg = make_config(n, sigma2, delta, r, kplus);
  BlockPlan plan;
  plan.threads = 1;  // trials already run in parallel

  GuaranteeReport report;
  report.trials = trials;
  report.records.resize(trials);
  if (threads == 0) threads = hardware_threads();

  parallel_rows(0, trials, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      const std::uint64_t trial_seed = derive_seed(seed, t);
      const Dataset ds = synth_gaussian(n, dim, trial_seed);
      const SymMatrix a = assemble_matrix(ds.points, spec, sigma2);
      SymMatrix work(a);
      const StopOutcome outcome = variant == GuaranteeVariant::rowwise
                                      ? stopped_cholesky_rowwise(work, cfg)
                                      : stopped_cholesky_blocked(work, plan, cfg);

      TrialRecord rec;
      rec.seed = trial_seed;
      if (const auto* s = std::get_if<Stopped>(&outcome)) {
        rec.stopped = true;
        rec.tau = s->tau;
        rec.estimate = s->estimate;
        rec.reference = logdet_reference(a);
        if (rec.reference == 0.0) {
          throw std::runtime_error("check_guarantee: reference log-determinant is zero");
        }
        rec.rel_error = std::abs(rec.reference - rec.estimate) / std::abs(rec.reference);
      } else {
        const auto& c = std::get<Completed>(outcome);
        rec.stopped = false;
        rec.tau = c.rows_processed;
        rec.estimate = c.log_det;
        rec.reference = c.log_det;
        rec.rel_error = 0.0;
      }
      report.records[t] = rec;
    }
  });

  for (const TrialRecord& rec : report.records) {
    if (rec.stopped) ++report.stopped_count;
    if (rec.rel_error > r) ++report.failures;
  }
  report.failure_rate = static_cast<double>(report.failures) / trials;
  report.binom_upper95 = binomial_upper95(report.failures, trials);
  return report;
}

double binomial_upper95(std::size_t failures, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("binomial_upper95: trials must be positive");
  if (failures >= trials) return 1.0;
  const double k = static_cast<double>(failures);
  const double n = static_cast<double>(trials);

  auto log_cdf = [&](double p) {
    // log sum_{i<=k} C(n,i) p^i (1-p)^(n-i), stable via log-space max shift
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(failures + 1);
    for (std::size_t i = 0; i <= failures; ++i) {
      const double di = static_cast<double>(i);
      const double lt = std::lgamma(n + 1) - std::lgamma(di + 1) - std::lgamma(n - di + 1) +
                        di * std::log(p) + (n - di) * std::log1p(-p);
      terms.push_back(lt);
      max_term = std::max(max_term, lt);
    }
    double acc = 0.0;
    for (const double lt : terms) acc += std::exp(lt - max_term);
    return max_term + std::log(acc);
  };

  const double target = std::log(0.05);
  double lo = k / n;
  double hi = 1.0 - 1e-15;
  if (lo == 0.0) lo = 1e-15;
  for (int iter = 0; iter < 200 && hi - lo > 1e-12; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (log_cdf(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace stopdet::oracle
