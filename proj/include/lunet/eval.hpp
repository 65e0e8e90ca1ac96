// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lunet {

/// counts[actual][predicted].
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t classes() const { return class_names.size(); }
  std::uint64_t total() const;
  std::uint64_t actual_count(std::size_t cls) const;
  bool operator==(const ConfusionMatrix &) const = default;
};

ConfusionMatrix confusion(std::span<const std::size_t> actual,
                          std::span<const std::size_t> predicted,
                          std::vector<std::string> class_names);

/// Detection metrics of an attack-vs-normal split. A metric whose
/// denominator is zero is absent.
struct MetricSet {
  std::optional<double> acc;
  std::optional<double> dr;
  std::optional<double> fpr;
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  static MetricSet from_counts(std::uint64_t tp, std::uint64_t tn,
                               std::uint64_t fp, std::uint64_t fn);
  bool operator==(const MetricSet &) const = default;
};

/// Every class except `normal_index` counts as attack.
MetricSet binary_metrics(const ConfusionMatrix &cm, std::size_t normal_index = 0);

struct ClassMetrics {
  std::string name;
  std::optional<double> dr;
  std::optional<double> fpr;
  bool operator==(const ClassMetrics &) const = default;
};

/// One-vs-rest: class c positive, every other class negative.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix &cm);

/// Unweighted mean over folds. Absent fold values are skipped; the *_n
/// fields count the folds that contributed.
struct AggregateMetrics {
  std::size_t folds = 0;
  std::optional<double> acc;
  std::optional<double> dr;
  std::optional<double> fpr;
  std::size_t acc_n = 0;
  std::size_t dr_n = 0;
  std::size_t fpr_n = 0;
  bool operator==(const AggregateMetrics &) const = default;
};

AggregateMetrics aggregate_folds(std::span<const MetricSet> folds);

struct FoldResult {
  std::size_t fold = 0;
  MetricSet metrics;
  ConfusionMatrix confusion;
  bool operator==(const FoldResult &) const = default;
};

struct EvalReport {
  std::vector<FoldResult> per_fold;
  AggregateMetrics aggregate;
  /// Computed from the confusion matrix pooled over all folds.
  std::vector<ClassMetrics> per_class;
  bool operator==(const EvalReport &) const = default;
};

/// Builds per-fold metrics, the aggregate and (for more than two classes)
/// the per-class breakdown.
EvalReport make_report(std::vector<std::pair<std::size_t, ConfusionMatrix>> folds,
                       std::size_t normal_index = 0);
ConfusionMatrix pooled_confusion(const EvalReport &report);

enum class ReportFormat { json_lines, csv, pretty };

ReportFormat parse_report_format(std::string_view text);
/// Stable field order, metrics at fixed 4-decimal precision. Empty sections
/// are omitted.
std::string render_report(const EvalReport &report, ReportFormat format);
/// Inverse of the json-lines rendering.
EvalReport parse_report(std::string_view json_lines);
/// Labeled CSV block: header row of predicted classes, one row per actual.
std::string render_confusion_csv(const ConfusionMatrix &cm);

} // namespace lunet
