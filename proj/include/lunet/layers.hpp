// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lunet/rng.hpp"
#include "lunet/tensor.hpp"

namespace lunet {

enum class Mode { train, infer };

/// A named trainable tensor and its gradient accumulator (same shape).
struct ParamEntry {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered, uniquely named parameter set of one layer.
class LayerParams {
 public:
  void add(std::string name, Tensor value);

  Tensor &value(std::string_view name);
  const Tensor &value(std::string_view name) const;
  Tensor &grad(std::string_view name);
  const Tensor &grad(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<ParamEntry> &entries() { return entries_; }
  const std::vector<ParamEntry> &entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  void zero_grad();

 private:
  ParamEntry &find(std::string_view name);
  const ParamEntry &find(std::string_view name) const;

  std::vector<ParamEntry> entries_;
};

/// A differentiable transform over batched tensors. The first axis is always
/// the batch axis; `output_shape` works on per-sample shapes (batch removed).
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string kind() const = 0;
  virtual Shape output_shape(const Shape &input) const = 0;

  /// Caches whatever backward() needs.
  virtual Tensor forward(const Tensor &x, Mode mode) = 0;
  /// Gradient w.r.t. the last forward input; adds parameter gradients into
  /// params().
  virtual Tensor backward(const Tensor &upstream) = 0;

  virtual std::unique_ptr<Layer> clone() const = 0;

  /// Non-trainable state that checkpoints persist (batch-norm statistics).
  virtual std::vector<std::pair<std::string, Tensor *>> buffers() { return {}; }

  LayerParams &params() { return params_; }
  const LayerParams &params() const { return params_; }

 protected:
  /// Records the forward output shape for the backward() contract check.
  void remember_output(const Tensor &out);
  void check_upstream(const Tensor &upstream) const;

  LayerParams params_;

 private:
  Shape forward_output_shape_;
};

using LayerPtr = std::unique_ptr<Layer>;

// ---------------------------------------------------------------------------
// Layers

/// Valid (unpadded) stride-1 cross-correlation over [batch, length, c_in].
/// Parameters: "filters" [c_out, c_in, m], "bias" [c_out].
class Conv1D : public Layer {
 public:
  Conv1D(std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel);
  Conv1D(Tensor filters, Tensor bias);

  /// Filters ~ N(0, sqrt(2 / (c_in * m))), bias zero.
  void initialize(Rng &rng);

  std::string kind() const override { return "conv1d"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

  std::size_t in_channels() const { return in_; }
  std::size_t out_channels() const { return out_; }
  std::size_t kernel() const { return kernel_; }

 private:
  void check_input(const Shape &shape) const;
  std::vector<double> unrolled_filters() const;

  std::size_t in_, out_, kernel_;
  Tensor input_;
  std::vector<double> unrolled_;
};

class Relu : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Shape output_shape(const Shape &input) const override { return input; }
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor input_;
};

/// Non-overlapping max pooling along the length axis (window == stride).
/// A trailing remainder shorter than the window is dropped. Gradient goes to
/// the first maximal element of each window.
class MaxPool1D : public Layer {
 public:
  explicit MaxPool1D(std::size_t pool);

  std::string kind() const override { return "maxpool1d"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

  std::size_t pool() const { return pool_; }

 private:
  std::size_t pool_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.99;
  double epsilon = 1e-5;
};

/// Per-feature batch normalization followed by the learned affine map
/// gamma * x_hat + beta. Features are the last axis; statistics reduce over
/// every other axis. Parameters: "gamma", "beta".
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(std::size_t features, double momentum = 0.99,
                     double epsilon = 1e-5);

  std::string kind() const override { return "batchnorm"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;
  std::vector<std::pair<std::string, Tensor *>> buffers() override;

  BatchNormState &state() { return state_; }
  const BatchNormState &state() const { return state_; }

 private:
  std::size_t features_;
  BatchNormState state_;
  Mode last_mode_ = Mode::infer;
  Tensor normalized_;
  std::vector<double> inv_std_;
};

/// Hidden output and memory state of an LSTM between steps.
struct LstmState {
  Tensor h;
  Tensor s;
};

/// LSTM over [batch, length, in]. The four sub-nets p (input gate), g
/// (candidate), f (forget gate) and q (output gate) are packed column-wise in
/// that order: "U" [in, 4*cells], "W" [cells, 4*cells], "b" [4*cells].
///
///   n(t) = b_n + x(t) U_n + h(t-1) W_n          for n in {p, g, f, q}
///   s(t) = sig(f) * s(t-1) + sig(p) * tanh(g)
///   h(t) = tanh(s(t)) * sig(q)
class Lstm : public Layer {
 public:
  Lstm(std::size_t inputs, std::size_t cells, bool return_sequences);

  /// U, W ~ N(0, 0.1); b = 0.
  void initialize(Rng &rng);

  std::string kind() const override { return "lstm"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

  std::size_t inputs() const { return in_; }
  std::size_t cells() const { return cells_; }
  bool return_sequences() const { return return_sequences_; }

 private:
  std::size_t in_, cells_;
  bool return_sequences_;

  // Forward caches, indexed [(t * batch + b) * cells + j].
  Tensor input_;
  std::size_t batch_ = 0, steps_ = 0;
  std::vector<double> gate_p_, gate_g_, gate_f_, gate_q_;
  std::vector<double> state_, tanh_state_, hidden_;
};

/// Row-major reinterpretation of each sample to a new per-sample shape.
class Reshape : public Layer {
 public:
  explicit Reshape(Shape target);

  std::string kind() const override { return "reshape"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Shape target_;
  Shape input_shape_;
};

/// Inverted dropout: in training each element is zeroed with probability
/// `rate` and survivors are scaled by 1 / (1 - rate). Identity at inference.
class Dropout : public Layer {
 public:
  Dropout(double rate, std::uint64_t seed);

  std::string kind() const override { return "dropout"; }
  Shape output_shape(const Shape &input) const override { return input; }
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

  double rate() const { return rate_; }
  /// While frozen, train-mode forward reuses the last mask (gradient checks).
  void freeze_mask(bool frozen) { frozen_ = frozen; }

 private:
  double rate_;
  Rng rng_;
  bool frozen_ = false;
  std::vector<double> mask_;
  bool masked_ = false;
};

class GlobalAvgPool : public Layer {
 public:
  std::string kind() const override { return "global_avg_pool"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Shape input_shape_;
};

/// y = x W + b. Parameters: "W" [in, out], "b" [out].
class Dense : public Layer {
 public:
  Dense(std::size_t inputs, std::size_t outputs);
  Dense(Tensor weights, Tensor bias);

  /// W ~ N(0, sqrt(2 / in)), b = 0.
  void initialize(Rng &rng);

  std::string kind() const override { return "dense"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  std::size_t in_, out_;
  Tensor input_;
};

/// Row-wise softmax over [batch, classes].
class Softmax : public Layer {
 public:
  std::string kind() const override { return "softmax"; }
  Shape output_shape(const Shape &input) const override;
  Tensor forward(const Tensor &x, Mode mode) override;
  Tensor backward(const Tensor &upstream) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Tensor output_;
};

// ---------------------------------------------------------------------------
// Stateless entry points

Tensor conv1d_forward(const Tensor &x, const Tensor &filters,
                      const Tensor &bias);
Tensor maxpool1d_forward(const Tensor &x, std::size_t pool);
/// Train mode updates `state`'s running statistics.
Tensor batchnorm_forward(const Tensor &x, const Tensor &gamma,
                         const Tensor &beta, BatchNormState &state, Mode mode);
/// One LSTM step on x_t [batch, in] using the packed "U", "W", "b" of
/// `params`. Returns h(t) and the new state.
std::pair<Tensor, LstmState> lstm_step(const Tensor &x_t,
                                       const LstmState &state,
                                       const LayerParams &params);
/// Zero-initialized state; [batch, length, cells] or [batch, cells].
Tensor lstm_forward(const Tensor &x, const LayerParams &params,
                    bool return_sequences);
Tensor dropout_forward(const Tensor &x, double rate, Mode mode, Rng &rng);
Tensor global_avg_pool(const Tensor &x);
Tensor dense_forward(const Tensor &x, const Tensor &weights,
                     const Tensor &bias);
Tensor softmax(const Tensor &x);
/// [batch, length, c] -> [batch, length', c'] preserving flat order.
Tensor reshape_bridge(const Tensor &x, std::size_t length,
                      std::size_t channels);

} // namespace lunet
