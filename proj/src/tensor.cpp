// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "dysflux/error.hpp"

namespace dysflux {

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " +
                                 shape_to_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " +
                                 shape_to_string(shape_));
  }
  if (shape_product(shape_) != data_.size()) {
    throw ShapeError("shape " + shape_to_string(shape_) + " does not hold " +
                     std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::from_vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                     shape_to_string(shape_));
  }
  return shape_[axis];
}

std::span<double> Tensor::slice(std::size_t i) {
  const std::size_t stride = data_.size() / shape_.at(0);
  return std::span<double>(data_).subspan(i * stride, stride);
}

std::span<const double> Tensor::slice(std::size_t i) const {
  const std::size_t stride = data_.size() / shape_.at(0);
  return std::span<const double>(data_).subspan(i * stride, stride);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got " +
                     shape_to_string(t.shape()));
  }
}

}  // namespace dysflux
