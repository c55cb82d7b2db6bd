#include "rnli/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rnli {

Shape::Shape(std::initializer_list<std::size_t> extents) {
  if (extents.size() < 1 || extents.size() > 3) {
    throw std::invalid_argument("tensor rank must be 1..3");
  }
  for (std::size_t e : extents) {
    if (e == 0) throw std::invalid_argument("tensor extents must be positive");
    extents_[rank_++] = e;
  }
}

std::size_t Shape::size() const {
  if (rank_ == 0) return 0;
  std::size_t n = 1;
  for (std::size_t i = 0; i < rank_; ++i) n *= extents_[i];
  return n;
}

std::string Shape::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < rank_; ++i) {
    if (i) s += "x";
    s += std::to_string(extents_[i]);
  }
  return s + ")";
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape), values_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : shape_(shape), values_(std::move(values)) {
  if (values_.size() != shape_.size()) {
    throw std::invalid_argument("tensor values do not match shape " + shape_.to_string());
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor(Shape::vector(values.size()), std::vector<double>(values));
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace rnli
