// SPDX-License-Identifier: Apache-2.0
#include "lunet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lunet/model.hpp"
#include "lunet/training.hpp"

namespace lunet {

double GradCheckReport::max_rel_error() const {
  double worst = 0.0;
  for (const auto &e : entries)
    worst = std::max(worst, e.max_rel_error);
  return worst;
}

namespace {

std::vector<std::size_t> pick_coordinates(std::size_t size, std::size_t want,
                                          Rng &rng) {
  std::vector<std::size_t> all(size);
  std::iota(all.begin(), all.end(), 0);
  if (size <= want)
    return all;
  rng.shuffle(std::span<std::size_t>(all));
  all.resize(want);
  std::sort(all.begin(), all.end());
  return all;
}

double weighted_sum(const Tensor &y, const Tensor &weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    total += y[i] * weights[i];
  return total;
}

} // namespace

GradCheckReport check_gradients(std::string subject,
                                const std::function<double()> &loss,
                                const std::vector<GradProbe> &probes,
                                const GradCheckOptions &options) {
  GradCheckReport report{std::move(subject), {}};
  Rng rng(options.seed);
  for (const auto &probe : probes) {
    GradCheckEntry entry{probe.name, 0, 0.0};
    Tensor &value = *probe.value;
    for (std::size_t i :
         pick_coordinates(value.size(), options.coordinates, rng)) {
      const double saved = value[i];
      value[i] = saved + options.step;
      const double plus = loss();
      value[i] = saved - options.step;
      const double minus = loss();
      value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      const double analytic = (*probe.grad)[i];
      const double denom =
          std::max({std::abs(analytic), std::abs(numeric), options.floor});
      const double rel = std::abs(analytic - numeric) / denom;
      entry.max_rel_error = std::max(entry.max_rel_error,
                                     std::isfinite(rel) ? rel : 1e300);
      ++entry.checked;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

GradCheckReport gradient_check(Layer &layer, const Tensor &input, Mode mode,
                               const GradCheckOptions &options) {
  auto *dropout = dynamic_cast<Dropout *>(&layer);
  if (dropout)
    dropout->freeze_mask(false);

  Tensor x = input;
  Tensor y = layer.forward(x, mode);
  if (dropout)
    dropout->freeze_mask(true);
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  const Tensor weights = rng_normal(rng, y.shape(), 0.0, 1.0);

  layer.params().zero_grad();
  const Tensor dx = layer.backward(weights);
  std::vector<Tensor> param_grads;
  for (const auto &e : layer.params().entries())
    param_grads.push_back(e.grad);

  std::vector<GradProbe> probes{{"input", &x, &dx}};
  auto &entries = layer.params().entries();
  for (std::size_t i = 0; i < entries.size(); ++i)
    probes.push_back({entries[i].name, &entries[i].value, &param_grads[i]});

  auto loss = [&] { return weighted_sum(layer.forward(x, mode), weights); };
  GradCheckReport report =
      check_gradients(layer.kind(), loss, probes, options);
  if (dropout)
    dropout->freeze_mask(false);
  return report;
}

GradCheckReport gradient_check(LuNetModel &model, const Tensor &input,
                               const std::vector<std::size_t> &labels,
                               const GradCheckOptions &options) {
  const Mode previous = model.mode();
  // Train-mode forwards move the batch-norm running statistics; restore them.
  std::vector<Tensor> saved;
  for (auto &[name, t] : model.named_tensors())
    saved.push_back(*t);
  model.set_mode(Mode::train);
  model.freeze_dropout(false);
  const Tensor targets = one_hot(labels, model.spec().num_classes);

  Tensor x = input;
  Tensor probs = model.forward(x);
  model.freeze_dropout(true);
  model.zero_grad();
  const Tensor dx =
      model.backward_from_logits(softmax_cross_entropy_grad(probs, targets));

  std::vector<GradProbe> probes{{"input", &x, &dx}};
  std::vector<Tensor> grads;
  std::vector<std::pair<std::string, Tensor *>> values;
  for (std::size_t i = 0; i < model.size(); ++i)
    for (auto &e : model.layer(i).params().entries()) {
      values.emplace_back(std::to_string(i) + "." + model.layer(i).kind() +
                              "." + e.name,
                          &e.value);
      grads.push_back(e.grad);
    }
  for (std::size_t i = 0; i < values.size(); ++i)
    probes.push_back({values[i].first, values[i].second, &grads[i]});

  auto loss = [&] { return cross_entropy_loss(model.forward(x), targets); };
  GradCheckReport report = check_gradients("lunet", loss, probes, options);
  model.freeze_dropout(false);
  model.zero_grad();
  model.set_mode(previous);
  auto restored = model.named_tensors();
  for (std::size_t i = 0; i < restored.size(); ++i)
    *restored[i].second = saved[i];
  return report;
}

GradCheckReport softmax_cross_entropy_check(
    const Tensor &logits, const std::vector<std::size_t> &labels,
    const GradCheckOptions &options) {
  Softmax head;
  Tensor z = logits;
  const Tensor targets = one_hot(labels, logits.dim(1));
  const Tensor dz =
      softmax_cross_entropy_grad(head.forward(z, Mode::train), targets);
  auto loss = [&] {
    return cross_entropy_loss(head.forward(z, Mode::train), targets);
  };
  return check_gradients("softmax_cross_entropy", loss, {{"logits", &z, &dz}},
                         options);
}

} // namespace lunet
