#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stopdet {

// Dense symmetric matrix with the lower triangle authoritative. The
// factorization routines overwrite the lower triangle in place and never
// read above the diagonal.
class SymMatrix {
 public:
  explicit SymMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {
    if (dim == 0) throw std::invalid_argument("SymMatrix: dimension must be positive");
  }

  std::size_t dim() const { return dim_; }

  double* row(std::size_t i) { return a_.data() + i * dim_; }
  const double* row(std::size_t i) const { return a_.data() + i * dim_; }

  double& at(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }

  double max_diag() const {
    double m = a_[0];
    for (std::size_t i = 1; i < dim_; ++i) m = std::max(m, a_[i * dim_ + i]);
    return m;
  }

  // Copies the lower triangle into the upper triangle.
  void mirror_lower() {
    for (std::size_t i = 0; i < dim_; ++i) {
      for (std::size_t j = i + 1; j < dim_; ++j) a_[i * dim_ + j] = a_[j * dim_ + i];
    }
  }

  const std::vector<double>& storage() const { return a_; }
  std::vector<double>& storage() { return a_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> a_;
};

}  // namespace stopdet
