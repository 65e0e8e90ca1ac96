// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lunet/layers.hpp"
#include "lunet/model.hpp"

namespace lunet {

/// Probabilities are clamped to [kLogFloor, 1] before taking the log.
inline constexpr double kLogFloor = 1e-12;

Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes);

/// Mean over the batch of -sum(y * log(clamp(p))).
double cross_entropy_loss(const Tensor &probs, const Tensor &labels);

/// Gradient of the mean cross-entropy w.r.t. the softmax inputs:
/// (probs - labels) / batch.
Tensor softmax_cross_entropy_grad(const Tensor &probs, const Tensor &labels);

struct RmsPropConfig {
  double learning_rate = 0.001;
  double rho = 0.9;
  double epsilon = 1e-7;

  void validate() const;
};

/// acc <- rho * acc + (1 - rho) * g^2;  w <- w - lr * g / (sqrt(acc) + eps).
/// Accumulators start at zero on first use. Gradients are zeroed after the
/// update.
class RmsProp {
 public:
  explicit RmsProp(RmsPropConfig config = {});

  void step(const std::vector<LayerParams *> &params);
  void step(LayerParams &params) { step(std::vector<LayerParams *>{&params}); }

  const RmsPropConfig &config() const { return config_; }

 private:
  RmsPropConfig config_;
  std::vector<Tensor> accumulators_;
};

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void validate() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

/// One structured log line: `epoch=<i> loss=<mean> acc=<accuracy>`.
std::string format_epoch(const EpochMetrics &m);

/// One pass over `rows` of (features, labels) in mini-batches: forward in
/// training mode, cross-entropy, backward, RMSprop update. The visiting
/// order is shuffled with Rng(seed + epoch) when `shuffle` is set.
/// Throws NumericError if a batch loss is not finite.
EpochMetrics train_epoch(LuNetModel &model, const Tensor &features,
                         std::span<const std::size_t> labels,
                         std::span<const std::size_t> rows,
                         const TrainConfig &config, RmsProp &optimizer,
                         std::size_t epoch);

/// Runs `config.epochs` epochs, writing one format_epoch() line per epoch to
/// `log` when given.
std::vector<EpochMetrics> fit(LuNetModel &model, const Tensor &features,
                              std::span<const std::size_t> labels,
                              std::span<const std::size_t> rows,
                              const TrainConfig &config,
                              const RmsPropConfig &optimizer,
                              std::ostream *log = nullptr);

/// Gathers `rows` of a [samples, width] matrix.
Tensor gather_rows(const Tensor &matrix, std::span<const std::size_t> rows);

/// Infer-mode predictions over `rows`, in chunks of `batch_size`.
std::vector<std::size_t> predict_rows(LuNetModel &model, const Tensor &features,
                                      std::span<const std::size_t> rows,
                                      std::size_t batch_size = 256);

} // namespace lunet
