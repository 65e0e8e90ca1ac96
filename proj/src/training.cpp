// SPDX-License-Identifier: Apache-2.0
#include "lunet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "lunet/error.hpp"

namespace lunet {

Tensor one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  Tensor out({labels.size(), classes}, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes)
      throw ShapeError("label " + std::to_string(labels[i]) +
                       " out of range for " + std::to_string(classes) +
                       " classes");
    out.at(i, labels[i]) = 1.0;
  }
  return out;
}

namespace {

void check_targets(const Tensor &probs, const Tensor &labels) {
  if (probs.rank() != 2 || probs.shape() != labels.shape())
    throw ShapeError("cross-entropy shape mismatch: probs " +
                     to_string(probs.shape()) + ", labels " +
                     to_string(labels.shape()));
  for (std::size_t r = 0; r < labels.dim(0); ++r) {
    std::size_t ones = 0;
    for (std::size_t c = 0; c < labels.dim(1); ++c) {
      const double v = labels.at(r, c);
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        throw ShapeError("labels row " + std::to_string(r) + " is not one-hot");
    }
    if (ones != 1)
      throw ShapeError("labels row " + std::to_string(r) + " is not one-hot");
  }
}

} // namespace

double cross_entropy_loss(const Tensor &probs, const Tensor &labels) {
  check_targets(probs, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (labels[i] != 0.0)
      total -= labels[i] * std::log(std::clamp(probs[i], kLogFloor, 1.0));
  return total / static_cast<double>(probs.dim(0));
}

Tensor softmax_cross_entropy_grad(const Tensor &probs, const Tensor &labels) {
  check_targets(probs, labels);
  const double scale = 1.0 / static_cast<double>(probs.dim(0));
  Tensor g(probs.shape());
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (probs[i] - labels[i]) * scale;
  return g;
}

void RmsPropConfig::validate() const {
  if (!(learning_rate > 0.0))
    throw ConfigError("optimizer.learning_rate must be positive");
  if (!(rho > 0.0 && rho < 1.0))
    throw ConfigError("optimizer.rho must lie in (0, 1)");
  if (!(epsilon > 0.0))
    throw ConfigError("optimizer.epsilon must be positive");
}

RmsProp::RmsProp(RmsPropConfig config) : config_(config) { config_.validate(); }

void RmsProp::step(const std::vector<LayerParams *> &params) {
  std::size_t slot = 0;
  for (auto *layer : params)
    for (auto &e : layer->entries()) {
      if (slot == accumulators_.size())
        accumulators_.emplace_back(e.value.shape(), 0.0);
      Tensor &acc = accumulators_[slot++];
      if (acc.shape() != e.value.shape())
        throw ShapeError("optimizer state does not match parameter '" +
                         e.name + "'");
      const double rho = config_.rho, lr = config_.learning_rate,
                   eps = config_.epsilon;
      for (std::size_t i = 0; i < e.value.size(); ++i) {
        const double g = e.grad[i];
        acc[i] = rho * acc[i] + (1.0 - rho) * g * g;
        e.value[i] -= lr * g / (std::sqrt(acc[i]) + eps);
      }
      e.grad.fill(0.0);
    }
}

void TrainConfig::validate() const {
  if (epochs == 0)
    throw ConfigError("train.epochs must be >= 1");
  if (batch_size == 0)
    throw ConfigError("train.batch_size must be >= 1");
}

std::string format_epoch(const EpochMetrics &m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f acc=%.4f", m.epoch,
                m.mean_loss, m.accuracy);
  return buf;
}

Tensor gather_rows(const Tensor &matrix, std::span<const std::size_t> rows) {
  if (matrix.rank() != 2)
    throw ShapeError("gather_rows expects a matrix, got " +
                     to_string(matrix.shape()));
  const std::size_t width = matrix.dim(1);
  Tensor out({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::copy_n(matrix.data() + rows[i] * width, width,
                out.data() + i * width);
  return out;
}

EpochMetrics train_epoch(LuNetModel &model, const Tensor &features,
                         std::span<const std::size_t> labels,
                         std::span<const std::size_t> rows,
                         const TrainConfig &config, RmsProp &optimizer,
                         std::size_t epoch) {
  config.validate();
  if (rows.empty())
    throw DataError("training split is empty");
  if (config.batch_size > rows.size())
    throw ConfigError("batch size " + std::to_string(config.batch_size) +
                      " exceeds training-set size " +
                      std::to_string(rows.size()));
  if (features.rank() != 2 || features.dim(1) != model.spec().input_features)
    throw ShapeError("training features " + to_string(features.shape()) +
                     " do not match model input width " +
                     std::to_string(model.spec().input_features));

  std::vector<std::size_t> order(rows.begin(), rows.end());
  if (config.shuffle) {
    Rng rng(config.seed + epoch);
    rng.shuffle(std::span<std::size_t>(order));
  }

  model.set_mode(Mode::train);
  const std::size_t classes = model.spec().num_classes;
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> batch_labels;
  for (std::size_t start = 0; start < order.size();
       start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    const std::span<const std::size_t> batch(order.data() + start, end - start);
    Tensor x = gather_rows(features, batch);
    batch_labels.clear();
    for (auto r : batch)
      batch_labels.push_back(labels[r]);
    Tensor targets = one_hot(batch_labels, classes);

    Tensor probs = model.forward(x);
    const double loss = cross_entropy_loss(probs, targets);
    if (!std::isfinite(loss) || !probs.all_finite())
      throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                         " at batch starting " + std::to_string(start));
    loss_sum += loss * static_cast<double>(batch.size());
    const auto predicted = argmax_rows(probs);
    for (std::size_t i = 0; i < batch.size(); ++i)
      correct += predicted[i] == batch_labels[i];

    model.backward_from_logits(softmax_cross_entropy_grad(probs, targets));
    optimizer.step(model.parameters());
  }
  model.set_mode(Mode::infer);

  const double n = static_cast<double>(order.size());
  return {epoch, loss_sum / n, static_cast<double>(correct) / n};
}

std::vector<EpochMetrics> fit(LuNetModel &model, const Tensor &features,
                              std::span<const std::size_t> labels,
                              std::span<const std::size_t> rows,
                              const TrainConfig &config,
                              const RmsPropConfig &optimizer,
                              std::ostream *log) {
  RmsProp opt(optimizer);
  std::vector<EpochMetrics> history;
  for (std::size_t e = 0; e < config.epochs; ++e) {
    history.push_back(
        train_epoch(model, features, labels, rows, config, opt, e));
    if (log)
      *log << format_epoch(history.back()) << std::endl;
  }
  return history;
}

std::vector<std::size_t> predict_rows(LuNetModel &model, const Tensor &features,
                                      std::span<const std::size_t> rows,
                                      std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(rows.size());
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t end = std::min(rows.size(), start + batch_size);
    Tensor x = gather_rows(features, rows.subspan(start, end - start));
    const auto pred = predict_class(model, x);
    out.insert(out.end(), pred.begin(), pred.end());
  }
  return out;
}

} // namespace lunet
