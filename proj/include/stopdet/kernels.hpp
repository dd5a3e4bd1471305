#pragma once

#include <span>

#include "stopdet/pointset.hpp"
#include "stopdet/symmatrix.hpp"

namespace stopdet {

enum class KernelFamily { rbf, ou };

// Stationary covariance function: theta is the signal variance, lengthscale
// controls the decay of the correlation with distance.
struct KernelSpec {
  KernelFamily family = KernelFamily::rbf;
  double theta = 1.0;
  double lengthscale = 1.0;
};

// Throws std::invalid_argument unless theta > 0 and lengthscale > 0.
void validate(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> z);

struct AssembleOptions {
  // Off-diagonal entries with absolute value below this threshold are zeroed.
  // Disabled by default.
  double clamp_below = 0.0;
  std::size_t threads = 1;
};

// A = K + sigma2*I over the given points. Diagonal entries are written as
// theta + sigma2 exactly; both triangles are materialized.
SymMatrix assemble_matrix(const PointSet& points, const KernelSpec& spec, double sigma2,
                          const AssembleOptions& opts = {});

// log(theta + sigma2): the tightest almost-sure upper bound on the log of the
// assembled diagonal for stationary kernels. Callers may substitute any
// larger value.
double kappa_plus(const KernelSpec& spec, double sigma2);

}  // namespace stopdet
