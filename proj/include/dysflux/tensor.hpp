// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace dysflux {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor of doubles. All computation in the toolkit is
/// 64-bit; 32-bit values only exist in files.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor from_vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Contiguous slice along the leading axis (a row of a matrix, a layer of
  /// an L×T×D tensor).
  std::span<double> slice(std::size_t i);
  std::span<const double> slice(std::size_t i) const;

  void fill(double value);
  bool all_finite() const noexcept;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::size_t shape_product(const Shape& shape);

/// Throws ShapeError unless `t` has exactly the given rank.
void require_rank(const Tensor& t, std::size_t rank, const char* what);

}  // namespace dysflux
