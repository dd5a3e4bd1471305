#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stopdet {

// Raised when a pivot (or pivoted residual) is not numerically positive,
// i.e. the input matrix was not positive definite to working precision.
class FactorizationError : public std::runtime_error {
 public:
  FactorizationError(std::size_t index, double pivot)
      : std::runtime_error("factorization failed at index " + std::to_string(index) +
                           ": non-positive pivot " + std::to_string(pivot)),
        index_(index),
        pivot_(pivot) {}

  std::size_t index() const { return index_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t index_;
  double pivot_;
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stopdet
