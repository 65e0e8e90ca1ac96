// SPDX-License-Identifier: Apache-2.0
#include "lunet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lunet/error.hpp"
#include "linalg.hpp"

namespace lunet {

std::string to_string(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i)
    os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

void validate_shape(const Shape &shape) {
  if (shape.empty() || shape.size() > 3)
    throw ShapeError("tensor rank must be 1..3, got shape " + to_string(shape));
  for (auto d : shape)
    if (d == 0)
      throw ShapeError("tensor dimensions must be positive, got shape " +
                       to_string(shape));
}

std::size_t element_count(const Shape &shape) {
  std::size_t n = 1;
  for (auto d : shape)
    n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  validate_shape(shape_);
  data_.assign(element_count(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  validate_shape(shape_);
  if (data_.size() != element_count(shape_))
    throw ShapeError("shape " + to_string(shape_) + " needs " +
                     std::to_string(element_count(shape_)) + " values, got " +
                     std::to_string(data_.size()));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto &row : rows) {
    if (row.size() != c)
      throw ShapeError("ragged matrix literal");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(flat));
}

Tensor Tensor::reshaped(Shape shape) const {
  validate_shape(shape);
  if (element_count(shape) != size())
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " +
                     to_string(shape) + ": element count differs");
  return Tensor(std::move(shape), data_);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw ShapeError("matmul needs rank-2 operands, got " +
                     to_string(a.shape()) + " and " + to_string(b.shape()));
  if (a.dim(1) != b.dim(0))
    throw ShapeError("matmul dimension mismatch: " + to_string(a.shape()) +
                     " x " + to_string(b.shape()));
  Tensor out({a.dim(0), b.dim(1)});
  linalg::gemm(a.data(), b.data(), out.data(), a.dim(0), a.dim(1), b.dim(1));
  if (!out.all_finite())
    throw NumericError("matmul overflowed to a non-finite value");
  return out;
}

namespace {

double combine(ElementOp op, double x, double y) {
  switch (op) {
  case ElementOp::add:
    return x + y;
  case ElementOp::sub:
    return x - y;
  case ElementOp::mul:
  case ElementOp::scale:
    return x * y;
  case ElementOp::div:
    if (y == 0.0)
      throw NumericError("element-wise division by zero");
    return x / y;
  case ElementOp::max:
    return std::max(x, y);
  }
  return 0.0;
}

} // namespace

Tensor elementwise(ElementOp op, const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape())
    throw ShapeError("element-wise shape mismatch: " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = combine(op, a[i], b[i]);
  if (!out.all_finite())
    throw NumericError("element-wise result is not finite");
  return out;
}

Tensor elementwise(ElementOp op, const Tensor &a, double b) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = combine(op, a[i], b);
  if (!out.all_finite())
    throw NumericError("element-wise result is not finite");
  return out;
}

double apply(Activation kind, double z) {
  switch (kind) {
  case Activation::relu:
    return z > 0.0 ? z : 0.0;
  case Activation::sigmoid:
    return sigmoid(z);
  case Activation::tanh:
    return std::tanh(z);
  }
  return z;
}

Tensor map_activation(Activation kind, const Tensor &x) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = apply(kind, x[i]);
  return out;
}

} // namespace lunet
