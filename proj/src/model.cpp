// SPDX-License-Identifier: Apache-2.0
#include "lunet/model.hpp"

#include "lunet/error.hpp"

namespace lunet {

void LuNetSpec::validate() const {
  if (levels.empty())
    throw ConfigError("model.levels must list at least one level");
  for (auto w : levels)
    if (w == 0)
      throw ConfigError("model.levels entries must be >= 1");
  if (kernel_size == 0)
    throw ConfigError("model.kernel_size must be >= 1");
  if (pool_size == 0)
    throw ConfigError("model.pool_size must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0))
    throw ConfigError("model.dropout_rate must lie in [0, 1)");
  if (final_conv_filters == 0)
    throw ConfigError("model.final_conv_filters must be >= 1");
  if (num_classes < 2)
    throw ConfigError("model.num_classes must be >= 2");
  if (input_features == 0)
    throw ConfigError("model.input_features must be >= 1");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0))
    throw ConfigError("model.bn_momentum must lie in (0, 1)");
  if (!(bn_epsilon > 0.0))
    throw ConfigError("model.bn_epsilon must be positive");
}

LuNetModel LuNetModel::build(const LuNetSpec &spec) {
  spec.validate();
  LuNetModel model;
  model.spec_ = spec;
  Rng rng(spec.init_seed);
  Shape shape{spec.input_features, 1};

  auto push = [&](LayerPtr layer, const std::string &where) {
    try {
      shape = layer->output_shape(shape);
    } catch (const ShapeError &e) {
      throw ConfigError(where + ": " + e.what() + " (input_features=" +
                        std::to_string(spec.input_features) + ")");
    }
    model.shapes_.push_back(shape);
    model.layers_.push_back(std::move(layer));
  };

  std::size_t channels = 1;
  for (std::size_t k = 0; k < spec.levels.size(); ++k) {
    const std::size_t width = spec.levels[k];
    const std::string where = "level " + std::to_string(k + 1);
    auto conv = std::make_unique<Conv1D>(channels, width, spec.kernel_size);
    conv->initialize(rng);
    push(std::move(conv), where);
    push(std::make_unique<Relu>(), where);
    push(std::make_unique<MaxPool1D>(spec.pool_size), where);
    push(std::make_unique<BatchNorm>(width, spec.bn_momentum, spec.bn_epsilon),
         where);
    auto lstm = std::make_unique<Lstm>(width, width, true);
    lstm->initialize(rng);
    push(std::move(lstm), where);
    // Per-step LSTM outputs already form the sequence the next block needs.
    push(std::make_unique<Reshape>(shape), where);
    channels = width;
  }

  const std::string tail = "final layers";
  push(std::make_unique<Dropout>(spec.dropout_rate, rng.next_u64()), tail);
  auto conv = std::make_unique<Conv1D>(channels, spec.final_conv_filters,
                                       spec.kernel_size);
  conv->initialize(rng);
  push(std::move(conv), tail);
  push(std::make_unique<Relu>(), tail);
  push(std::make_unique<GlobalAvgPool>(), tail);
  auto dense =
      std::make_unique<Dense>(spec.final_conv_filters, spec.num_classes);
  dense->initialize(rng);
  push(std::move(dense), tail);
  push(std::make_unique<Softmax>(), tail);
  return model;
}

LuNetModel::LuNetModel(const LuNetModel &other)
    : spec_(other.spec_), shapes_(other.shapes_), mode_(other.mode_) {
  layers_.reserve(other.layers_.size());
  for (const auto &l : other.layers_)
    layers_.push_back(l->clone());
}

LuNetModel &LuNetModel::operator=(const LuNetModel &other) {
  if (this != &other) {
    LuNetModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor LuNetModel::forward(const Tensor &x) {
  if (x.rank() != 2 || x.dim(1) != spec_.input_features)
    throw ShapeError("model expects [batch, " +
                     std::to_string(spec_.input_features) + "] features, got " +
                     to_string(x.shape()));
  Tensor h = x.reshaped({x.dim(0), x.dim(1), 1});
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i]->forward(h, mode_);
    const Shape runtime(h.shape().begin() + 1, h.shape().end());
    if (runtime != shapes_[i])
      throw ShapeError("layer " + std::to_string(i) + " (" +
                       layers_[i]->kind() + ") produced " + to_string(runtime) +
                       ", planned " + to_string(shapes_[i]));
  }
  return h;
}

Tensor LuNetModel::backward_from_logits(const Tensor &dlogits) {
  Tensor g = dlogits;
  for (std::size_t i = layers_.size() - 1; i-- > 0;)
    g = layers_[i]->backward(g);
  return g.reshaped({g.dim(0), g.dim(1)});
}

void LuNetModel::zero_grad() {
  for (auto &l : layers_)
    l->params().zero_grad();
}

std::vector<LayerParams *> LuNetModel::parameters() {
  std::vector<LayerParams *> out;
  for (auto &l : layers_)
    if (!l->params().empty())
      out.push_back(&l->params());
  return out;
}

std::vector<std::pair<std::string, Tensor *>> LuNetModel::named_tensors() {
  std::vector<std::pair<std::string, Tensor *>> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string prefix =
        std::to_string(i) + "." + layers_[i]->kind() + ".";
    for (auto &e : layers_[i]->params().entries())
      out.emplace_back(prefix + e.name, &e.value);
    for (auto &[name, t] : layers_[i]->buffers())
      out.emplace_back(prefix + name, t);
  }
  return out;
}

std::size_t LuNetModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto &l : layers_)
    for (const auto &e : l->params().entries())
      n += e.value.size();
  return n;
}

void LuNetModel::freeze_dropout(bool frozen) {
  for (auto &l : layers_)
    if (auto *d = dynamic_cast<Dropout *>(l.get()))
      d->freeze_mask(frozen);
}

std::vector<std::size_t> argmax_rows(const Tensor &probs) {
  if (probs.rank() != 2)
    throw ShapeError("argmax_rows expects [batch, classes], got " +
                     to_string(probs.shape()));
  std::vector<std::size_t> out(probs.dim(0));
  for (std::size_t r = 0; r < probs.dim(0); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < probs.dim(1); ++c)
      if (probs.at(r, c) > probs.at(r, best))
        best = c;
    out[r] = best;
  }
  return out;
}

std::vector<std::size_t> predict_class(LuNetModel &model, const Tensor &x) {
  const Mode previous = model.mode();
  model.set_mode(Mode::infer);
  Tensor probs = model.forward(x);
  model.set_mode(previous);
  return argmax_rows(probs);
}

} // namespace lunet
