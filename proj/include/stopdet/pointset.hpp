#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace stopdet {

// Row-major collection of feature vectors with uniform dimension.
class PointSet {
 public:
  PointSet() = default;

  PointSet(std::size_t count, std::size_t dim)
      : count_(count), dim_(dim), values_(count * dim, 0.0) {}

  PointSet(std::size_t count, std::size_t dim, std::vector<double> values)
      : count_(count), dim_(dim), values_(std::move(values)) {
    if (values_.size() != count_ * dim_) {
      throw std::invalid_argument("PointSet: value count does not match count*dim");
    }
  }

  std::size_t size() const { return count_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return count_ == 0; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  std::size_t count_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

}  // namespace stopdet
