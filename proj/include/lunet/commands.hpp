// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "lunet/config.hpp"
#include "lunet/eval.hpp"
#include "lunet/layers.hpp"

namespace lunet {

/// Process status of a failed gradient check.
inline constexpr int kGradcheckFailureExit = 5;

/// Loads the configured dataset (files or synthetic) and applies the
/// stratified subsample. Features are not standardized.
DatasetTable load_run_data(const RunConfig &config);

/// Infer-mode confusion matrix of `model` over `rows` of standardized
/// features.
ConfusionMatrix evaluate_rows(LuNetModel &model, const Tensor &features,
                              const DatasetTable &table,
                              std::span<const std::size_t> rows);

/// Stratified k-fold cross-validation: per fold, standardization fit on the
/// training split, a fresh model seeded with seed + fold, evaluation of the
/// held-out split. Writes report.json-lines, report.csv and
/// confusion_fold<i>.csv into output_dir; the epoch log and a summary table
/// go to `out`.
EvalReport cmd_crossval(const RunConfig &config, std::ostream &out);

struct TrainOutcome {
  MetricSet heldout;
  ConfusionMatrix confusion;
  std::filesystem::path checkpoint;
};

/// Trains on folds 1..4 of a stratified 5-fold split, reports fold 0 and
/// saves a checkpoint.
TrainOutcome cmd_train(const RunConfig &config, std::ostream &out);

/// Applies the checkpoint at config.checkpoint_path() to every row of the
/// configured data, using the stored standardization.
EvalReport cmd_evaluate(const RunConfig &config, std::ostream &out);

struct GradCheckRow {
  std::string subject;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckRun {
  /// "layers", "model" or "all".
  std::string scale = "all";
  double tolerance = 1e-4;
  /// Applied to every layer under test; lets tests inject faults.
  std::function<LayerPtr(LayerPtr)> wrap;
};

/// One row per layer type and one for a single-level model on [2, 32, 1].
std::vector<GradCheckRow> cmd_gradcheck(const GradCheckRun &run,
                                        std::ostream &out);

} // namespace lunet
