#include "stopdet/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "stopdet/parallel.hpp"
#include "stopdet/simd.hpp"

namespace stopdet {

namespace {

double eval_unchecked(const KernelSpec& spec, const double* x, const double* z,
                      std::size_t dim) {
  const double d2 = simd::sq_dist(x, z, dim);
  switch (spec.family) {
    case KernelFamily::rbf:
      return spec.theta *
             std::exp(-d2 / (2.0 * spec.lengthscale * spec.lengthscale));
    case KernelFamily::ou:
      return spec.theta * std::exp(-std::sqrt(d2) / spec.lengthscale);
  }
  return 0.0;
}

}  // namespace

void validate(const KernelSpec& spec) {
  if (!(spec.theta > 0.0)) throw std::invalid_argument("kernel: theta must be positive");
  if (!(spec.lengthscale > 0.0)) {
    throw std::invalid_argument("kernel: lengthscale must be positive");
  }
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z) {
  validate(spec);
  if (x.size() != z.size()) {
    throw std::invalid_argument("kernel_eval: input dimensions differ");
  }
  return eval_unchecked(spec, x.data(), z.data(), x.size());
}

SymMatrix assemble_matrix(const PointSet& points, const KernelSpec& spec, double sigma2,
                          const AssembleOptions& opts) {
  validate(spec);
  if (points.empty()) throw std::invalid_argument("assemble_matrix: empty point set");
  if (points.dim() == 0) {
    throw std::invalid_argument("assemble_matrix: zero-dimensional points");
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("assemble_matrix: sigma2 must be positive");

  const std::size_t n = points.size();
  const std::size_t dim = points.dim();
  SymMatrix a(n);
  const double diag = spec.theta + sigma2;
  const std::size_t threads = opts.threads == 0 ? hardware_threads() : opts.threads;

  parallel_rows(0, n, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double* xi = points.row(i).data();
      double* row = a.row(i);
      for (std::size_t j = 0; j < i; ++j) {
        double v = eval_unchecked(spec, xi, points.row(j).data(), dim);
        if (opts.clamp_below > 0.0 && std::abs(v) < opts.clamp_below) v = 0.0;
        row[j] = v;
      }
      row[i] = diag;
    }
  });
  a.mirror_lower();
  return a;
}

double kappa_plus(const KernelSpec& spec, double sigma2) {
  validate(spec);
  if (!(sigma2 > 0.0)) throw std::invalid_argument("kappa_plus: sigma2 must be positive");
  return std::log(spec.theta + sigma2);
}

}  // namespace stopdet
