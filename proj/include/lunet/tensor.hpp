// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lunet {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape &shape);

/// Throws ShapeError unless `shape` has rank 1..3 and no zero dimension.
void validate_shape(const Shape &shape);

std::size_t element_count(const Shape &shape);

/// Dense row-major array of doubles with rank 1 to 3.
///
/// A default-constructed tensor is "unset": rank 0, no storage. Every other
/// constructor enforces the shape invariants.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  /// Rank-1 tensor holding `values`.
  static Tensor vector(std::initializer_list<double> values);
  /// Rank-2 tensor from nested rows, all of equal length.
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const Shape &shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double &at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double &at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Same elements, new shape. Throws ShapeError if the element counts differ.
  Tensor reshaped(Shape shape) const;

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Tensor &a, const Tensor &b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

/// Row-by-column product of two rank-2 tensors.
Tensor matmul(const Tensor &a, const Tensor &b);

enum class ElementOp { add, sub, mul, div, max, scale };

/// Element-wise `a op b` for equal shapes. Division by an exact zero and any
/// non-finite result raise instead of producing Inf/NaN.
Tensor elementwise(ElementOp op, const Tensor &a, const Tensor &b);
Tensor elementwise(ElementOp op, const Tensor &a, double b);

inline Tensor operator+(const Tensor &a, const Tensor &b) {
  return elementwise(ElementOp::add, a, b);
}
inline Tensor operator-(const Tensor &a, const Tensor &b) {
  return elementwise(ElementOp::sub, a, b);
}

enum class Activation { relu, sigmoid, tanh };

double apply(Activation kind, double z);
Tensor map_activation(Activation kind, const Tensor &x);

/// Numerically stable logistic function.
inline double sigmoid(double z) {
  if (z >= 0.0)
    return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
} // namespace lunet
