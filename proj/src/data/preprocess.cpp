// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>

#include "lunet/data.hpp"
#include "lunet/error.hpp"
#include "lunet/rng.hpp"

namespace lunet {

Standardization fit_standardization(const Tensor &features,
                                    std::span<const std::size_t> rows) {
  if (features.rank() != 2)
    throw ShapeError("standardization expects a matrix");
  if (rows.empty())
    throw DataError("standardization needs at least one fit row");
  const std::size_t width = features.dim(1);
  Standardization s{std::vector<double>(width, 0.0),
                    std::vector<double>(width, 0.0)};
  for (auto r : rows)
    for (std::size_t c = 0; c < width; ++c)
      s.mean[c] += features.at(r, c);
  const double n = static_cast<double>(rows.size());
  for (auto &m : s.mean)
    m /= n;
  for (auto r : rows)
    for (std::size_t c = 0; c < width; ++c) {
      const double d = features.at(r, c) - s.mean[c];
      s.stddev[c] += d * d;
    }
  for (auto &v : s.stddev)
    v = std::sqrt(v / n);
  return s;
}

Tensor Standardization::apply(const Tensor &features) const {
  if (features.rank() != 2 || features.dim(1) != mean.size())
    throw ShapeError("standardization fitted on " +
                     std::to_string(mean.size()) + " columns, got " +
                     to_string(features.shape()));
  Tensor out(features.shape());
  for (std::size_t r = 0; r < features.dim(0); ++r)
    for (std::size_t c = 0; c < mean.size(); ++c)
      out.at(r, c) = stddev[c] < kMinStddev
                         ? 0.0
                         : (features.at(r, c) - mean[c]) / stddev[c];
  return out;
}

DatasetTable standardize(const DatasetTable &table,
                         std::span<const std::size_t> fit_rows) {
  DatasetTable out = table;
  out.standardization = fit_standardization(table.features, fit_rows);
  out.features = out.standardization.apply(table.features);
  return out;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold)
      rows.push_back(i);
  return rows;
}

std::vector<std::size_t> FoldPlan::validation_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold)
      rows.push_back(i);
  return rows;
}

namespace {

std::vector<std::vector<std::size_t>>
rows_by_class(std::span<const std::size_t> labels) {
  std::vector<std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= by_class.size())
      by_class.resize(labels[i] + 1);
    by_class[labels[i]].push_back(i);
  }
  return by_class;
}

std::string class_label(std::size_t cls, std::span<const std::string> names) {
  if (cls < names.size())
    return "'" + names[cls] + "'";
  return std::to_string(cls);
}

} // namespace

FoldPlan stratified_kfold(std::span<const std::size_t> labels, std::size_t k,
                          std::uint64_t seed,
                          std::span<const std::string> class_names) {
  if (k < 2)
    throw ConfigError("fold count must be >= 2, got " + std::to_string(k));
  auto by_class = rows_by_class(labels);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (!by_class[c].empty() && by_class[c].size() < k)
      throw DataError("class " + class_label(c, class_names) + " has " +
                      std::to_string(by_class[c].size()) +
                      " samples, fewer than k=" + std::to_string(k));

  FoldPlan plan{k, std::vector<std::size_t>(labels.size(), 0)};
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (auto &members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (auto row : members) {
      plan.assignments[row] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> labels,
                                              std::size_t count,
                                              std::uint64_t seed,
                                              std::size_t min_per_class) {
  if (count >= labels.size()) {
    std::vector<std::size_t> all(labels.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  auto by_class = rows_by_class(labels);
  const double total = static_cast<double>(labels.size());

  // Largest-remainder allocation of `count` across classes.
  std::vector<std::size_t> take(by_class.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t allocated = 0;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    const double exact =
        static_cast<double>(count) * static_cast<double>(by_class[c].size()) /
        total;
    take[c] = static_cast<std::size_t>(std::floor(exact));
    allocated += take[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto &a, const auto &b) { return a.first > b.first; });
  for (std::size_t i = 0; allocated < count && i < remainders.size(); ++i) {
    const std::size_t c = remainders[i].second;
    if (take[c] < by_class[c].size()) {
      ++take[c];
      ++allocated;
    }
  }
  for (std::size_t c = 0; c < by_class.size(); ++c)
    take[c] = std::min(by_class[c].size(), std::max(take[c], min_per_class));

  Rng rng(seed);
  std::vector<std::size_t> picked;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto members = by_class[c];
    rng.shuffle(std::span<std::size_t>(members));
    picked.insert(picked.end(), members.begin(), members.begin() + take[c]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

DatasetTable select_rows(const DatasetTable &table,
                         std::span<const std::size_t> rows) {
  DatasetTable out;
  out.encoded_columns = table.encoded_columns;
  out.class_names = table.class_names;
  out.standardization = table.standardization;
  const std::size_t width = table.features.dim(1);
  out.features = Tensor({rows.size(), width});
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy_n(table.features.data() + rows[i] * width, width,
                out.features.data() + i * width);
    out.labels.push_back(table.labels.at(rows[i]));
  }
  return out;
}

DatasetTable synth_dataset(const SynthSpec &spec) {
  if (!(spec.separation > 0.0))
    throw ConfigError("synthetic separation must be positive");
  if (spec.classes < 2 || spec.samples == 0 || spec.features == 0)
    throw ConfigError("synthetic dataset needs >= 2 classes, samples and "
                      "features");
  Rng rng(spec.seed);
  std::vector<std::vector<double>> centers(spec.classes);
  for (auto &center : centers) {
    center.resize(spec.features);
    double norm = 0.0;
    for (auto &v : center) {
      v = rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto &v : center)
      v *= spec.separation / norm;
  }

  DatasetTable table;
  table.features = Tensor({spec.samples, spec.features});
  table.labels.resize(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const std::size_t cls = i % spec.classes;
    table.labels[i] = cls;
    for (std::size_t f = 0; f < spec.features; ++f)
      table.features.at(i, f) = centers[cls][f] + rng.normal();
  }
  for (std::size_t f = 0; f < spec.features; ++f)
    table.encoded_columns.push_back("x" + std::to_string(f));
  for (std::size_t c = 0; c < spec.classes; ++c)
    table.class_names.push_back("class" + std::to_string(c));
  return table;
}

} // namespace lunet
