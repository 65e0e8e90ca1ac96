// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lunet/layers.hpp"

namespace lunet {

class LuNetModel;

struct GradCheckOptions {
  double step = 1e-5;
  /// Coordinates sampled per tensor; tensors this small or smaller are
  /// checked exhaustively.
  std::size_t coordinates = 50;
  /// Denominator floor of the relative error
  /// |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
  std::uint64_t seed = 1234;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::string subject;
  /// "input" first, then one entry per parameter tensor.
  std::vector<GradCheckEntry> entries;

  double max_rel_error() const;
  bool passed(double tolerance) const { return max_rel_error() < tolerance; }
};

/// A tensor to perturb and the analytic gradient to compare against.
struct GradProbe {
  std::string name;
  Tensor *value;
  const Tensor *grad;
};

/// Compares `probes`' analytic gradients with central differences of `loss`.
/// `loss` must recompute the scalar from the current probe values.
GradCheckReport check_gradients(std::string subject,
                                const std::function<double()> &loss,
                                const std::vector<GradProbe> &probes,
                                const GradCheckOptions &options = {});

/// Checks a single layer under loss = sum(forward(x) * R) for a fixed random
/// R. Dropout masks are frozen for the duration of the check.
GradCheckReport gradient_check(Layer &layer, const Tensor &input, Mode mode,
                               const GradCheckOptions &options = {});

/// Checks a whole model under the mean cross-entropy of its softmax output
/// against `labels`, in training mode with dropout masks frozen.
GradCheckReport gradient_check(LuNetModel &model, const Tensor &input,
                               const std::vector<std::size_t> &labels,
                               const GradCheckOptions &options = {});

/// Checks the fused softmax + cross-entropy gradient (probs - one_hot) / batch
/// with respect to the logits.
GradCheckReport softmax_cross_entropy_check(const Tensor &logits,
                                            const std::vector<std::size_t> &labels,
                                            const GradCheckOptions &options = {});

} // namespace lunet
