// SPDX-License-Identifier: Apache-2.0
#include "lunet/eval.hpp"

#include <numeric>

#include "lunet/error.hpp"

namespace lunet {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (const auto &row : counts)
    sum = std::accumulate(row.begin(), row.end(), sum);
  return sum;
}

std::uint64_t ConfusionMatrix::actual_count(std::size_t cls) const {
  const auto &row = counts.at(cls);
  return std::accumulate(row.begin(), row.end(), std::uint64_t{0});
}

ConfusionMatrix confusion(std::span<const std::size_t> actual,
                          std::span<const std::size_t> predicted,
                          std::vector<std::string> class_names) {
  if (actual.size() != predicted.size())
    throw ShapeError("confusion: " + std::to_string(actual.size()) +
                     " actual labels but " + std::to_string(predicted.size()) +
                     " predictions");
  const std::size_t k = class_names.size();
  ConfusionMatrix cm{std::move(class_names),
                     std::vector<std::vector<std::uint64_t>>(
                         k, std::vector<std::uint64_t>(k, 0))};
  for (std::size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] >= k || predicted[i] >= k)
      throw ShapeError("confusion: label out of range at sample " +
                       std::to_string(i));
    ++cm.counts[actual[i]][predicted[i]];
  }
  return cm;
}

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0)
    return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

MetricSet MetricSet::from_counts(std::uint64_t tp, std::uint64_t tn,
                                 std::uint64_t fp, std::uint64_t fn) {
  MetricSet m;
  m.tp = tp;
  m.tn = tn;
  m.fp = fp;
  m.fn = fn;
  m.acc = ratio(tp + tn, tp + tn + fp + fn);
  m.dr = ratio(tp, tp + fn);
  m.fpr = ratio(fp, fp + tn);
  return m;
}

MetricSet binary_metrics(const ConfusionMatrix &cm, std::size_t normal_index) {
  if (cm.classes() < 2 || normal_index >= cm.classes())
    throw ShapeError("binary_metrics needs >= 2 classes and a valid normal "
                     "class index");
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t a = 0; a < cm.classes(); ++a)
    for (std::size_t p = 0; p < cm.classes(); ++p) {
      const bool actual_attack = a != normal_index;
      const bool predicted_attack = p != normal_index;
      auto n = cm.counts[a][p];
      if (actual_attack)
        (predicted_attack ? tp : fn) += n;
      else
        (predicted_attack ? fp : tn) += n;
    }
  return MetricSet::from_counts(tp, tn, fp, fn);
}

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix &cm) {
  if (cm.classes() < 2)
    throw ShapeError("per_class_metrics needs >= 2 classes");
  std::vector<ClassMetrics> out;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t a = 0; a < cm.classes(); ++a)
      for (std::size_t p = 0; p < cm.classes(); ++p) {
        auto n = cm.counts[a][p];
        if (a == c)
          (p == c ? tp : fn) += n;
        else
          (p == c ? fp : tn) += n;
      }
    out.push_back({cm.class_names[c], ratio(tp, tp + fn), ratio(fp, fp + tn)});
  }
  return out;
}

AggregateMetrics aggregate_folds(std::span<const MetricSet> folds) {
  if (folds.empty())
    throw ShapeError("aggregate_folds needs at least one fold");
  AggregateMetrics agg;
  agg.folds = folds.size();
  auto mean = [&](auto field, std::size_t &n) -> std::optional<double> {
    double sum = 0.0;
    n = 0;
    for (const auto &f : folds)
      if (const auto &v = f.*field) {
        sum += *v;
        ++n;
      }
    if (n == 0)
      return std::nullopt;
    return sum / static_cast<double>(n);
  };
  agg.acc = mean(&MetricSet::acc, agg.acc_n);
  agg.dr = mean(&MetricSet::dr, agg.dr_n);
  agg.fpr = mean(&MetricSet::fpr, agg.fpr_n);
  return agg;
}

EvalReport make_report(std::vector<std::pair<std::size_t, ConfusionMatrix>> folds,
                       std::size_t normal_index) {
  EvalReport report;
  std::vector<MetricSet> metrics;
  for (auto &[index, cm] : folds) {
    auto m = binary_metrics(cm, normal_index);
    metrics.push_back(m);
    report.per_fold.push_back({index, m, std::move(cm)});
  }
  report.aggregate = aggregate_folds(metrics);
  auto pooled = pooled_confusion(report);
  if (pooled.classes() > 2)
    report.per_class = per_class_metrics(pooled);
  return report;
}

ConfusionMatrix pooled_confusion(const EvalReport &report) {
  if (report.per_fold.empty())
    return {};
  ConfusionMatrix pooled = report.per_fold.front().confusion;
  for (std::size_t f = 1; f < report.per_fold.size(); ++f) {
    const auto &cm = report.per_fold[f].confusion;
    if (cm.class_names != pooled.class_names)
      throw ShapeError("cannot pool confusion matrices over different classes");
    for (std::size_t a = 0; a < cm.classes(); ++a)
      for (std::size_t p = 0; p < cm.classes(); ++p)
        pooled.counts[a][p] += cm.counts[a][p];
  }
  return pooled;
}

} // namespace lunet
