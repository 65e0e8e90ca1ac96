// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "linalg.hpp"
#include "lunet/error.hpp"
#include "lunet/layers.hpp"

namespace lunet {

// --- ReLU ------------------------------------------------------------------

Tensor Relu::forward(const Tensor &x, Mode) {
  input_ = x;
  Tensor y = map_activation(Activation::relu, x);
  remember_output(y);
  return y;
}

Tensor Relu::backward(const Tensor &upstream) {
  check_upstream(upstream);
  Tensor dx(upstream.shape());
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx[i] = input_[i] > 0.0 ? upstream[i] : 0.0;
  return dx;
}

std::unique_ptr<Layer> Relu::clone() const {
  return std::make_unique<Relu>(*this);
}

// --- Reshape ---------------------------------------------------------------

Reshape::Reshape(Shape target) : target_(std::move(target)) {
  if (target_.empty() || target_.size() > 2)
    throw ShapeError("reshape target must be a per-sample shape of rank 1..2");
  validate_shape(target_);
}

Shape Reshape::output_shape(const Shape &input) const {
  if (element_count(input) != element_count(target_))
    throw ShapeError("cannot reshape per-sample " + to_string(input) + " to " +
                     to_string(target_) + ": element count differs");
  return target_;
}

Tensor Reshape::forward(const Tensor &x, Mode) {
  if (x.rank() < 2)
    throw ShapeError("reshape expects a batched tensor, got " +
                     to_string(x.shape()));
  Shape per_sample(x.shape().begin() + 1, x.shape().end());
  output_shape(per_sample);
  Shape out{x.dim(0)};
  out.insert(out.end(), target_.begin(), target_.end());
  input_shape_ = x.shape();
  Tensor y = x.reshaped(out);
  remember_output(y);
  return y;
}

Tensor Reshape::backward(const Tensor &upstream) {
  check_upstream(upstream);
  return upstream.reshaped(input_shape_);
}

std::unique_ptr<Layer> Reshape::clone() const {
  return std::make_unique<Reshape>(*this);
}

// --- Dropout ---------------------------------------------------------------

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate_ >= 0.0 && rate_ < 1.0))
    throw ShapeError("dropout rate must lie in [0, 1)");
}

Tensor Dropout::forward(const Tensor &x, Mode mode) {
  masked_ = mode == Mode::train && rate_ > 0.0;
  if (!masked_) {
    remember_output(x);
    return x;
  }
  if (!frozen_ || mask_.size() != x.size()) {
    const double keep = 1.0 / (1.0 - rate_);
    mask_.resize(x.size());
    for (auto &m : mask_)
      m = rng_.uniform() < rate_ ? 0.0 : keep;
  }
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = x[i] * mask_[i];
  remember_output(y);
  return y;
}

Tensor Dropout::backward(const Tensor &upstream) {
  check_upstream(upstream);
  if (!masked_)
    return upstream;
  Tensor dx(upstream.shape());
  for (std::size_t i = 0; i < dx.size(); ++i)
    dx[i] = upstream[i] * mask_[i];
  return dx;
}

std::unique_ptr<Layer> Dropout::clone() const {
  return std::make_unique<Dropout>(*this);
}

// --- Dense -----------------------------------------------------------------

Dense::Dense(std::size_t inputs, std::size_t outputs)
    : in_(inputs), out_(outputs) {
  params_.add("W", Tensor({in_, out_}, 0.0));
  params_.add("b", Tensor({out_}, 0.0));
}

Dense::Dense(Tensor weights, Tensor bias) {
  if (weights.rank() != 2)
    throw ShapeError("dense weights must be [in, out], got " +
                     to_string(weights.shape()));
  if (bias.rank() != 1 || bias.dim(0) != weights.dim(1))
    throw ShapeError("dense bias must be [out], got " +
                     to_string(bias.shape()));
  in_ = weights.dim(0);
  out_ = weights.dim(1);
  params_.add("W", std::move(weights));
  params_.add("b", std::move(bias));
}

void Dense::initialize(Rng &rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_));
  params_.value("W") = rng_normal(rng, {in_, out_}, 0.0, stddev);
  params_.value("b").fill(0.0);
}

Shape Dense::output_shape(const Shape &input) const {
  if (input.size() != 1 || input[0] != in_)
    throw ShapeError("dense expects per-sample [" + std::to_string(in_) +
                     "], got " + to_string(input));
  return {out_};
}

Tensor Dense::forward(const Tensor &x, Mode) {
  if (x.rank() != 2 || x.dim(1) != in_)
    throw ShapeError("dense expects [batch, " + std::to_string(in_) +
                     "], got " + to_string(x.shape()));
  const std::size_t batch = x.dim(0);
  const Tensor &bias = params_.value("b");
  Tensor y({batch, out_});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_; ++o)
      y.at(b, o) = bias[o];
  linalg::gemm(linalg::dense(x.data(), batch, in_), linalg::Op::none,
               linalg::dense(params_.value("W").data(), in_, out_),
               linalg::Op::none, linalg::dense(y.data(), batch, out_), true);
  input_ = x;
  remember_output(y);
  return y;
}

Tensor Dense::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t batch = input_.dim(0);
  linalg::gemm(linalg::dense(input_.data(), batch, in_), linalg::Op::transpose,
               linalg::dense(upstream.data(), batch, out_), linalg::Op::none,
               linalg::dense(params_.grad("W").data(), in_, out_), true);
  Tensor &db = params_.grad("b");
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t o = 0; o < out_; ++o)
      db[o] += upstream.at(b, o);
  Tensor dx({batch, in_});
  linalg::gemm(linalg::dense(upstream.data(), batch, out_), linalg::Op::none,
               linalg::dense(params_.value("W").data(), in_, out_),
               linalg::Op::transpose, linalg::dense(dx.data(), batch, in_),
               false);
  return dx;
}

std::unique_ptr<Layer> Dense::clone() const {
  return std::make_unique<Dense>(*this);
}

// --- Softmax ---------------------------------------------------------------

Shape Softmax::output_shape(const Shape &input) const {
  if (input.size() != 1 || input[0] < 2)
    throw ShapeError("softmax expects per-sample [classes >= 2], got " +
                     to_string(input));
  return input;
}

Tensor Softmax::forward(const Tensor &x, Mode) {
  if (x.rank() != 2 || x.dim(1) < 2)
    throw ShapeError("softmax expects [batch, classes >= 2], got " +
                     to_string(x.shape()));
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double peak = x.at(r, 0);
    for (std::size_t c = 1; c < cols; ++c)
      peak = std::max(peak, x.at(r, c));
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      y.at(r, c) = std::exp(x.at(r, c) - peak);
      total += y.at(r, c);
    }
    for (std::size_t c = 0; c < cols; ++c)
      y.at(r, c) /= total;
  }
  output_ = y;
  remember_output(y);
  return y;
}

Tensor Softmax::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t rows = output_.dim(0), cols = output_.dim(1);
  Tensor dx(output_.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0;
    for (std::size_t c = 0; c < cols; ++c)
      dot += upstream.at(r, c) * output_.at(r, c);
    for (std::size_t c = 0; c < cols; ++c)
      dx.at(r, c) = output_.at(r, c) * (upstream.at(r, c) - dot);
  }
  return dx;
}

std::unique_ptr<Layer> Softmax::clone() const {
  return std::make_unique<Softmax>(*this);
}

// --- Stateless entry points ------------------------------------------------

Tensor dropout_forward(const Tensor &x, double rate, Mode mode, Rng &rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw ShapeError("dropout rate must lie in [0, 1)");
  if (mode == Mode::infer || rate == 0.0)
    return x;
  const double keep = 1.0 / (1.0 - rate);
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = rng.uniform() < rate ? 0.0 : x[i] * keep;
  return y;
}

Tensor dense_forward(const Tensor &x, const Tensor &weights,
                     const Tensor &bias) {
  Dense layer(weights, bias);
  return layer.forward(x, Mode::infer);
}

Tensor softmax(const Tensor &x) {
  Softmax layer;
  return layer.forward(x, Mode::infer);
}

Tensor reshape_bridge(const Tensor &x, std::size_t length,
                      std::size_t channels) {
  if (x.rank() != 3)
    throw ShapeError("reshape_bridge expects [batch, length, channels], got " +
                     to_string(x.shape()));
  Reshape layer({length, channels});
  return layer.forward(x, Mode::infer);
}

} // namespace lunet
