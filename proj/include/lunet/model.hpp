// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lunet/layers.hpp"

namespace lunet {

/// Declarative LuNet architecture.
struct LuNetSpec {
  /// Filter count of each level's convolution, which is also that level's
  /// LSTM cell count.
  std::vector<std::size_t> levels{64, 128, 256};
  std::size_t kernel_size = 3;
  std::size_t pool_size = 2;
  double dropout_rate = 0.5;
  std::size_t final_conv_filters = 256;
  std::size_t num_classes = 2;
  std::size_t input_features = 0;
  std::uint64_t init_seed = 0;
  double bn_momentum = 0.99;
  double bn_epsilon = 1e-5;

  /// Field-level checks; throws ConfigError.
  void validate() const;

  friend bool operator==(const LuNetSpec &, const LuNetSpec &) = default;
};

/// Instantiated layer stack:
///
///   per level w:  Conv1D(w) -> ReLU -> MaxPool -> BatchNorm -> LSTM(w) -> Reshape
///   then:         Dropout -> Conv1D(final) -> ReLU -> GlobalAvgPool
///                 -> Dense(classes) -> Softmax
///
/// Input rows [batch, features] are viewed as sequences [batch, features, 1].
class LuNetModel {
 public:
  /// Validates the spec, propagates shapes through the stack and initializes
  /// weights from `spec.init_seed`. Throws ConfigError naming the level whose
  /// input is too short.
  static LuNetModel build(const LuNetSpec &spec);

  LuNetModel(const LuNetModel &other);
  LuNetModel &operator=(const LuNetModel &other);
  LuNetModel(LuNetModel &&) noexcept = default;
  LuNetModel &operator=(LuNetModel &&) noexcept = default;

  const LuNetSpec &spec() const { return spec_; }
  Mode mode() const { return mode_; }
  /// Switches batch-norm statistics and dropout together.
  void set_mode(Mode mode) { mode_ = mode; }

  /// Class probabilities [batch, num_classes].
  Tensor forward(const Tensor &x);
  /// Backpropagates a gradient taken w.r.t. the softmax inputs (logits)
  /// through every layer below the softmax. Returns d/dx [batch, features].
  Tensor backward_from_logits(const Tensor &dlogits);

  void zero_grad();
  std::vector<LayerParams *> parameters();
  /// Every persisted tensor (parameters, then buffers) under a qualified
  /// name "<index>.<kind>.<name>", in layer order.
  std::vector<std::pair<std::string, Tensor *>> named_tensors();
  std::size_t parameter_count() const;

  void freeze_dropout(bool frozen);

  std::size_t size() const { return layers_.size(); }
  Layer &layer(std::size_t i) { return *layers_.at(i); }
  const Layer &layer(std::size_t i) const { return *layers_.at(i); }
  /// Per-sample output shape of layer i, fixed at build time.
  const Shape &planned_shape(std::size_t i) const { return shapes_.at(i); }

 private:
  LuNetModel() = default;

  LuNetSpec spec_;
  std::vector<LayerPtr> layers_;
  std::vector<Shape> shapes_;
  Mode mode_ = Mode::infer;
};

/// Row-wise argmax; ties go to the lowest class index.
std::vector<std::size_t> argmax_rows(const Tensor &probs);

/// Infer-mode class prediction. Restores the model's previous mode.
std::vector<std::size_t> predict_class(LuNetModel &model, const Tensor &x);

} // namespace lunet
