// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "linalg.hpp"
#include "lunet/error.hpp"
#include "lunet/layers.hpp"

namespace lunet {

Conv1D::Conv1D(std::size_t in_channels, std::size_t out_channels,
               std::size_t kernel)
    : in_(in_channels), out_(out_channels), kernel_(kernel) {
  params_.add("filters", Tensor({out_, in_, kernel_}, 0.0));
  params_.add("bias", Tensor({out_}, 0.0));
}

Conv1D::Conv1D(Tensor filters, Tensor bias) {
  if (filters.rank() != 3)
    throw ShapeError("conv1d filters must be [c_out, c_in, m], got " +
                     to_string(filters.shape()));
  if (bias.rank() != 1 || bias.dim(0) != filters.dim(0))
    throw ShapeError("conv1d bias must be [c_out], got " +
                     to_string(bias.shape()));
  out_ = filters.dim(0);
  in_ = filters.dim(1);
  kernel_ = filters.dim(2);
  params_.add("filters", std::move(filters));
  params_.add("bias", std::move(bias));
}

void Conv1D::initialize(Rng &rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(in_ * kernel_));
  params_.value("filters") = rng_normal(rng, {out_, in_, kernel_}, 0.0, stddev);
  params_.value("bias").fill(0.0);
}

void Conv1D::check_input(const Shape &shape) const {
  if (shape.size() != 3 || shape[2] != in_)
    throw ShapeError("conv1d expects [batch, length, " + std::to_string(in_) +
                     "], got " + to_string(shape));
  if (shape[1] < kernel_)
    throw ShapeError("conv1d input length " + std::to_string(shape[1]) +
                     " is shorter than kernel " + std::to_string(kernel_));
}

Shape Conv1D::output_shape(const Shape &input) const {
  if (input.size() != 2 || input[1] != in_)
    throw ShapeError("conv1d expects per-sample [length, " +
                     std::to_string(in_) + "], got " + to_string(input));
  if (input[0] < kernel_)
    throw ShapeError("conv1d input length " + std::to_string(input[0]) +
                     " is shorter than kernel " + std::to_string(kernel_));
  return {input[0] - kernel_ + 1, out_};
}

// Filters rearranged to [(j * c_in + c), o] so that a window of the input,
// which is contiguous in row-major [length, c_in], multiplies it directly.
std::vector<double> Conv1D::unrolled_filters() const {
  const Tensor &f = params_.value("filters");
  std::vector<double> w(kernel_ * in_ * out_);
  for (std::size_t o = 0; o < out_; ++o)
    for (std::size_t c = 0; c < in_; ++c)
      for (std::size_t j = 0; j < kernel_; ++j)
        w[(j * in_ + c) * out_ + o] = f.at(o, c, j);
  return w;
}

Tensor Conv1D::forward(const Tensor &x, Mode) {
  check_input(x.shape());
  const std::size_t batch = x.dim(0), length = x.dim(1);
  const std::size_t out_len = length - kernel_ + 1;
  const std::size_t window = kernel_ * in_;
  unrolled_ = unrolled_filters();
  const Tensor &bias = params_.value("bias");

  Tensor y({batch, out_len, out_});
  for (std::size_t b = 0; b < batch; ++b) {
    double *yb = y.data() + b * out_len * out_;
    for (std::size_t i = 0; i < out_len; ++i)
      for (std::size_t o = 0; o < out_; ++o)
        yb[i * out_ + o] = bias[o];
    const linalg::ConstView windows{x.data() + b * length * in_, out_len,
                                    window, in_};
    linalg::gemm(windows, linalg::Op::none,
                 linalg::dense(unrolled_.data(), window, out_), linalg::Op::none,
                 linalg::dense(yb, out_len, out_), true);
  }
  input_ = x;
  remember_output(y);
  return y;
}

Tensor Conv1D::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t batch = input_.dim(0), length = input_.dim(1);
  const std::size_t out_len = length - kernel_ + 1;
  const std::size_t window = kernel_ * in_;

  std::vector<double> d_unrolled(window * out_, 0.0);
  std::vector<double> d_windows(out_len * window);
  Tensor dx(input_.shape(), 0.0);
  Tensor &dbias = params_.grad("bias");

  for (std::size_t b = 0; b < batch; ++b) {
    const double *gb = upstream.data() + b * out_len * out_;
    const linalg::ConstView windows{input_.data() + b * length * in_, out_len,
                                    window, in_};
    linalg::gemm(windows, linalg::Op::transpose,
                 linalg::dense(gb, out_len, out_), linalg::Op::none,
                 linalg::dense(d_unrolled.data(), window, out_), true);
    linalg::gemm(linalg::dense(gb, out_len, out_), linalg::Op::none,
                 linalg::dense(unrolled_.data(), window, out_),
                 linalg::Op::transpose,
                 linalg::dense(d_windows.data(), out_len, window), false);
    double *dxb = dx.data() + b * length * in_;
    for (std::size_t i = 0; i < out_len; ++i) {
      const double *row = d_windows.data() + i * window;
      double *dst = dxb + i * in_;
      for (std::size_t k = 0; k < window; ++k)
        dst[k] += row[k];
    }
    for (std::size_t i = 0; i < out_len; ++i)
      for (std::size_t o = 0; o < out_; ++o)
        dbias[o] += gb[i * out_ + o];
  }

  Tensor &dfilters = params_.grad("filters");
  for (std::size_t o = 0; o < out_; ++o)
    for (std::size_t c = 0; c < in_; ++c)
      for (std::size_t j = 0; j < kernel_; ++j)
        dfilters.at(o, c, j) += d_unrolled[(j * in_ + c) * out_ + o];
  return dx;
}

std::unique_ptr<Layer> Conv1D::clone() const {
  return std::make_unique<Conv1D>(*this);
}

Tensor conv1d_forward(const Tensor &x, const Tensor &filters,
                      const Tensor &bias) {
  Conv1D layer(filters, bias);
  return layer.forward(x, Mode::infer);
}

} // namespace lunet
