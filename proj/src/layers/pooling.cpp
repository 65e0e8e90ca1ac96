// SPDX-License-Identifier: Apache-2.0
#include "lunet/error.hpp"
#include "lunet/layers.hpp"

namespace lunet {

MaxPool1D::MaxPool1D(std::size_t pool) : pool_(pool) {
  if (pool_ == 0)
    throw ShapeError("maxpool1d window must be positive");
}

Shape MaxPool1D::output_shape(const Shape &input) const {
  if (input.size() != 2)
    throw ShapeError("maxpool1d expects per-sample [length, channels], got " +
                     to_string(input));
  if (input[0] < pool_)
    throw ShapeError("maxpool1d input length " + std::to_string(input[0]) +
                     " is shorter than window " + std::to_string(pool_));
  return {input[0] / pool_, input[1]};
}

Tensor MaxPool1D::forward(const Tensor &x, Mode) {
  if (x.rank() != 3)
    throw ShapeError("maxpool1d expects [batch, length, channels], got " +
                     to_string(x.shape()));
  const Shape per_sample = output_shape({x.dim(1), x.dim(2)});
  const std::size_t batch = x.dim(0), length = x.dim(1), channels = x.dim(2);
  const std::size_t out_len = per_sample[0];

  Tensor y({batch, out_len, channels});
  argmax_.assign(y.size(), 0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < out_len; ++i)
      for (std::size_t c = 0; c < channels; ++c) {
        std::size_t best = (b * length + i * pool_) * channels + c;
        for (std::size_t j = 1; j < pool_; ++j) {
          const std::size_t idx = (b * length + i * pool_ + j) * channels + c;
          if (x[idx] > x[best])
            best = idx;
        }
        const std::size_t o = (b * out_len + i) * channels + c;
        y[o] = x[best];
        argmax_[o] = best;
      }
  input_shape_ = x.shape();
  remember_output(y);
  return y;
}

Tensor MaxPool1D::backward(const Tensor &upstream) {
  check_upstream(upstream);
  Tensor dx(input_shape_, 0.0);
  for (std::size_t o = 0; o < upstream.size(); ++o)
    dx[argmax_[o]] += upstream[o];
  return dx;
}

std::unique_ptr<Layer> MaxPool1D::clone() const {
  return std::make_unique<MaxPool1D>(*this);
}

Shape GlobalAvgPool::output_shape(const Shape &input) const {
  if (input.size() != 2)
    throw ShapeError(
        "global_avg_pool expects per-sample [length, channels], got " +
        to_string(input));
  return {input[1]};
}

Tensor GlobalAvgPool::forward(const Tensor &x, Mode) {
  if (x.rank() != 3)
    throw ShapeError("global_avg_pool expects [batch, length, channels], got " +
                     to_string(x.shape()));
  const std::size_t batch = x.dim(0), length = x.dim(1), channels = x.dim(2);
  Tensor y({batch, channels}, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < length; ++l)
      for (std::size_t c = 0; c < channels; ++c)
        y.at(b, c) += x.at(b, l, c);
    for (std::size_t c = 0; c < channels; ++c)
      y.at(b, c) /= static_cast<double>(length);
  }
  input_shape_ = x.shape();
  remember_output(y);
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t batch = input_shape_[0], length = input_shape_[1],
                    channels = input_shape_[2];
  const double scale = 1.0 / static_cast<double>(length);
  Tensor dx(input_shape_);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t l = 0; l < length; ++l)
      for (std::size_t c = 0; c < channels; ++c)
        dx.at(b, l, c) = upstream.at(b, c) * scale;
  return dx;
}

std::unique_ptr<Layer> GlobalAvgPool::clone() const {
  return std::make_unique<GlobalAvgPool>(*this);
}

Tensor maxpool1d_forward(const Tensor &x, std::size_t pool) {
  MaxPool1D layer(pool);
  return layer.forward(x, Mode::infer);
}

Tensor global_avg_pool(const Tensor &x) {
  GlobalAvgPool layer;
  return layer.forward(x, Mode::infer);
}

} // namespace lunet
