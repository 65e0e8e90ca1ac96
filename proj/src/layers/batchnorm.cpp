// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "lunet/error.hpp"
#include "lunet/layers.hpp"

namespace lunet {

BatchNorm::BatchNorm(std::size_t features, double momentum, double epsilon)
    : features_(features) {
  if (!(momentum > 0.0 && momentum < 1.0))
    throw ShapeError("batchnorm momentum must lie in (0, 1)");
  if (!(epsilon > 0.0))
    throw ShapeError("batchnorm epsilon must be positive");
  params_.add("gamma", Tensor({features_}, 1.0));
  params_.add("beta", Tensor({features_}, 0.0));
  state_.running_mean = Tensor({features_}, 0.0);
  state_.running_var = Tensor({features_}, 1.0);
  state_.momentum = momentum;
  state_.epsilon = epsilon;
}

Shape BatchNorm::output_shape(const Shape &input) const {
  if (input.empty() || input.back() != features_)
    throw ShapeError("batchnorm expects " + std::to_string(features_) +
                     " features on the last axis, got " + to_string(input));
  return input;
}

Tensor BatchNorm::forward(const Tensor &x, Mode mode) {
  if (x.rank() < 2 || x.shape().back() != features_)
    throw ShapeError("batchnorm expects [..., " + std::to_string(features_) +
                     "], got " + to_string(x.shape()));
  const std::size_t rows = x.size() / features_;
  const std::size_t f = features_;
  const Tensor &gamma = params_.value("gamma");
  const Tensor &beta = params_.value("beta");

  std::vector<double> mean(f, 0.0), var(f, 0.0);
  if (mode == Mode::train) {
    if (rows < 2)
      throw ShapeError("batchnorm needs at least 2 rows per feature in "
                       "training, got " + std::to_string(rows));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < f; ++c)
        mean[c] += x[r * f + c];
    for (auto &m : mean)
      m /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < f; ++c) {
        const double d = x[r * f + c] - mean[c];
        var[c] += d * d;
      }
    for (auto &v : var)
      v /= static_cast<double>(rows);
    const double m = state_.momentum;
    for (std::size_t c = 0; c < f; ++c) {
      state_.running_mean[c] = m * state_.running_mean[c] + (1.0 - m) * mean[c];
      state_.running_var[c] = m * state_.running_var[c] + (1.0 - m) * var[c];
    }
  } else {
    for (std::size_t c = 0; c < f; ++c) {
      mean[c] = state_.running_mean[c];
      var[c] = state_.running_var[c];
    }
  }

  inv_std_.resize(f);
  for (std::size_t c = 0; c < f; ++c)
    inv_std_[c] = 1.0 / std::sqrt(var[c] + state_.epsilon);

  normalized_ = Tensor(x.shape());
  Tensor y(x.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const std::size_t i = r * f + c;
      normalized_[i] = (x[i] - mean[c]) * inv_std_[c];
      y[i] = gamma[c] * normalized_[i] + beta[c];
    }
  last_mode_ = mode;
  remember_output(y);
  return y;
}

Tensor BatchNorm::backward(const Tensor &upstream) {
  check_upstream(upstream);
  const std::size_t f = features_;
  const std::size_t rows = upstream.size() / f;
  const Tensor &gamma = params_.value("gamma");
  Tensor &dgamma = params_.grad("gamma");
  Tensor &dbeta = params_.grad("beta");

  std::vector<double> sum_g(f, 0.0), sum_gx(f, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const std::size_t i = r * f + c;
      sum_g[c] += upstream[i];
      sum_gx[c] += upstream[i] * normalized_[i];
    }
  for (std::size_t c = 0; c < f; ++c) {
    dgamma[c] += sum_gx[c];
    dbeta[c] += sum_g[c];
  }

  Tensor dx(upstream.shape());
  if (last_mode_ == Mode::infer) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < f; ++c)
        dx[r * f + c] = upstream[r * f + c] * gamma[c] * inv_std_[c];
    return dx;
  }
  // Batch statistics depend on x, so the mean and variance paths contribute:
  // dx = gamma * inv_std / N * (N g - sum(g) - x_hat * sum(g x_hat)).
  const double n = static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const std::size_t i = r * f + c;
      dx[i] = gamma[c] * inv_std_[c] / n *
              (n * upstream[i] - sum_g[c] - normalized_[i] * sum_gx[c]);
    }
  return dx;
}

std::vector<std::pair<std::string, Tensor *>> BatchNorm::buffers() {
  return {{"running_mean", &state_.running_mean},
          {"running_var", &state_.running_var}};
}

std::unique_ptr<Layer> BatchNorm::clone() const {
  return std::make_unique<BatchNorm>(*this);
}

Tensor batchnorm_forward(const Tensor &x, const Tensor &gamma,
                         const Tensor &beta, BatchNormState &state,
                         Mode mode) {
  if (gamma.rank() != 1 || beta.shape() != gamma.shape())
    throw ShapeError("batchnorm gamma/beta must be equal-length vectors");
  BatchNorm layer(gamma.dim(0), state.momentum, state.epsilon);
  layer.params().value("gamma") = gamma;
  layer.params().value("beta") = beta;
  if (!state.running_mean.empty())
    layer.state().running_mean = state.running_mean;
  if (!state.running_var.empty())
    layer.state().running_var = state.running_var;
  Tensor y = layer.forward(x, mode);
  state = layer.state();
  return y;
}

} // namespace lunet
