// SPDX-License-Identifier: Apache-2.0
#include "lunet/commands.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>

#include "lunet/checkpoint.hpp"
#include "lunet/error.hpp"
#include "lunet/gradcheck.hpp"

namespace lunet {

namespace {

// Re-raises library errors with the pipeline stage prefixed, keeping the
// error type (and so the exit code).
template <class F> auto staged(const std::string &stage, F &&fn) {
  try {
    return fn();
  } catch (const ConfigError &e) {
    throw ConfigError(stage + ": " + e.what());
  } catch (const DataError &e) {
    throw DataError(stage + ": " + e.what());
  } catch (const FormatError &e) {
    throw FormatError(stage + ": " + e.what());
  } catch (const NumericError &e) {
    throw NumericError(stage + ": " + e.what());
  } catch (const ShapeError &e) {
    throw ShapeError(stage + ": " + e.what());
  }
}

void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size())))
    throw DataError("cannot write '" + path.string() + "'");
}

LuNetSpec spec_for(const RunConfig &config, const DatasetTable &table,
                   std::uint64_t init_seed) {
  LuNetSpec spec = config.model;
  spec.input_features = table.width();
  spec.num_classes = table.class_names.size();
  spec.init_seed = init_seed;
  return spec;
}

std::string metrics_line(const MetricSet &m) {
  auto field = [](const std::optional<double> &v) {
    if (!v)
      return std::string("absent");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return std::string(buf);
  };
  return "acc=" + field(m.acc) + " dr=" + field(m.dr) + " fpr=" + field(m.fpr) +
         " tp=" + std::to_string(m.tp) + " tn=" + std::to_string(m.tn) +
         " fp=" + std::to_string(m.fp) + " fn=" + std::to_string(m.fn);
}

} // namespace

DatasetTable load_run_data(const RunConfig &config) {
  DatasetTable table;
  if (config.dataset == "synthetic") {
    table = synth_dataset(config.synthetic);
  } else {
    table = load_dataset(config.data_path, schema_for(config.dataset),
                         config.task);
  }
  if (config.subsample > 0 && config.subsample < table.rows()) {
    const auto rows = stratified_subsample(table.labels, config.subsample,
                                           config.seed, config.folds);
    table = select_rows(table, rows);
  }
  return table;
}

ConfusionMatrix evaluate_rows(LuNetModel &model, const Tensor &features,
                              const DatasetTable &table,
                              std::span<const std::size_t> rows) {
  const auto predicted = predict_rows(model, features, rows);
  std::vector<std::size_t> actual;
  actual.reserve(rows.size());
  for (auto r : rows)
    actual.push_back(table.labels.at(r));
  return confusion(actual, predicted, table.class_names);
}

EvalReport cmd_crossval(const RunConfig &config, std::ostream &out) {
  staged("config", [&] { config.validate(); });
  const DatasetTable table = staged("load", [&] { return load_run_data(config); });
  out << "data rows=" << table.rows() << " features=" << table.width()
      << " classes=" << table.class_names.size() << "\n";
  const FoldPlan plan = staged("split", [&] {
    return stratified_kfold(table.labels, config.folds, config.seed,
                            table.class_names);
  });

  std::vector<std::pair<std::size_t, ConfusionMatrix>> folds;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const std::string stage = "fold " + std::to_string(f);
    folds.emplace_back(f, staged(stage, [&] {
      const auto train_rows = plan.train_rows(f);
      const auto val_rows = plan.validation_rows(f);
      const Tensor x =
          fit_standardization(table.features, train_rows).apply(table.features);
      LuNetModel model = LuNetModel::build(spec_for(config, table, config.seed + f));
      TrainConfig tc = config.train;
      tc.seed = config.seed + f;
      out << "fold=" << f << " train_rows=" << train_rows.size()
          << " validation_rows=" << val_rows.size() << "\n";
      fit(model, x, table.labels, train_rows, tc, config.optimizer, &out);
      auto cm = evaluate_rows(model, x, table, val_rows);
      out << "fold=" << f << " " << metrics_line(binary_metrics(cm)) << "\n";
      return cm;
    }));
  }

  EvalReport report = make_report(std::move(folds));
  staged("report", [&] {
    std::filesystem::create_directories(config.output_dir);
    write_text(config.output_dir / "report.json-lines",
               render_report(report, ReportFormat::json_lines));
    write_text(config.output_dir / "report.csv",
               render_report(report, ReportFormat::csv));
    for (const auto &fold : report.per_fold)
      write_text(config.output_dir /
                     ("confusion_fold" + std::to_string(fold.fold) + ".csv"),
                 render_confusion_csv(fold.confusion));
  });
  out << "report written to " << config.output_dir.string() << "\n\n"
      << render_report(report, ReportFormat::pretty);
  return report;
}

TrainOutcome cmd_train(const RunConfig &config, std::ostream &out) {
  staged("config", [&] { config.validate(); });
  const DatasetTable table = staged("load", [&] { return load_run_data(config); });
  const FoldPlan plan = staged("split", [&] {
    return stratified_kfold(table.labels, 5, config.seed, table.class_names);
  });
  const auto train_rows = plan.train_rows(0);
  const auto val_rows = plan.validation_rows(0);

  return staged("train", [&] {
    CheckpointMeta meta{config.task, table.class_names, table.encoded_columns,
                        fit_standardization(table.features, train_rows)};
    const Tensor x = meta.standardization.apply(table.features);
    LuNetModel model = LuNetModel::build(spec_for(config, table, config.seed));
    TrainConfig tc = config.train;
    tc.seed = config.seed;
    out << "train_rows=" << train_rows.size()
        << " heldout_rows=" << val_rows.size() << "\n";
    fit(model, x, table.labels, train_rows, tc, config.optimizer, &out);

    TrainOutcome outcome;
    outcome.confusion = evaluate_rows(model, x, table, val_rows);
    outcome.heldout = binary_metrics(outcome.confusion);
    outcome.checkpoint = config.checkpoint_path();
    save_checkpoint(outcome.checkpoint, model, meta);
    out << "heldout " << metrics_line(outcome.heldout) << "\n"
        << "checkpoint written to " << outcome.checkpoint.string() << "\n";
    return outcome;
  });
}

EvalReport cmd_evaluate(const RunConfig &config, std::ostream &out) {
  LoadedCheckpoint loaded = staged("checkpoint", [&] {
    return load_checkpoint(config.checkpoint_path());
  });
  const DatasetTable table = staged("load", [&] {
    RunConfig c = config;
    c.folds = 2; // evaluation needs no folds; keep validation happy
    c.validate();
    return load_run_data(c);
  });

  const Tensor x = staged("align", [&] {
    const auto &meta = loaded.meta;
    if (table.class_names != meta.class_names)
      throw DataError("data classes do not match the checkpoint's " +
                      to_string(meta.task) + " classes");
    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < meta.encoded_columns.size(); ++c)
      index[meta.encoded_columns[c]] = c;
    auto mismatch = [&](const std::string &detail) {
      return DataError("feature width mismatch: checkpoint expects " +
                       std::to_string(meta.encoded_columns.size()) +
                       " encoded columns, data has " +
                       std::to_string(table.width()) + " (" + detail + ")");
    };
    std::vector<std::size_t> target(table.width());
    std::vector<bool> covered(meta.encoded_columns.size(), false);
    for (std::size_t c = 0; c < table.width(); ++c) {
      auto it = index.find(table.encoded_columns[c]);
      if (it == index.end())
        throw mismatch("column '" + table.encoded_columns[c] + "' is unknown");
      target[c] = it->second;
      covered[it->second] = true;
    }
    // Only one-hot indicators of categories the data never shows may be
    // missing; they stay at zero.
    for (std::size_t c = 0; c < covered.size(); ++c)
      if (!covered[c] &&
          meta.encoded_columns[c].find('=') == std::string::npos)
        throw mismatch("column '" + meta.encoded_columns[c] + "' is missing");
    Tensor aligned({table.rows(), meta.encoded_columns.size()}, 0.0);
    for (std::size_t r = 0; r < table.rows(); ++r)
      for (std::size_t c = 0; c < table.width(); ++c)
        aligned.at(r, target[c]) = table.features.at(r, c);
    return meta.standardization.empty() ? aligned
                                        : meta.standardization.apply(aligned);
  });

  EvalReport report = staged("evaluate", [&] {
    std::vector<std::size_t> rows(table.rows());
    for (std::size_t i = 0; i < rows.size(); ++i)
      rows[i] = i;
    auto cm = evaluate_rows(loaded.model, x, table, rows);
    return make_report({{0, std::move(cm)}});
  });
  out << render_report(report, ReportFormat::json_lines) << "\n"
      << render_report(report, ReportFormat::pretty);
  return report;
}

std::vector<GradCheckRow> cmd_gradcheck(const GradCheckRun &run,
                                        std::ostream &out) {
  if (run.scale != "layers" && run.scale != "model" && run.scale != "all")
    throw ConfigError("gradcheck scale must be layers, model or all");
  std::vector<GradCheckRow> rows;
  auto record = [&](const GradCheckReport &report) {
    GradCheckRow row{report.subject, report.max_rel_error(),
                     report.passed(run.tolerance)};
    char line[160];
    std::snprintf(line, sizeof line,
                  "gradcheck subject=%s max_rel_error=%.3e status=%s\n",
                  row.subject.c_str(), row.max_rel_error,
                  row.passed ? "pass" : "FAIL");
    out << line;
    rows.push_back(row);
  };

  Rng rng(2024);
  auto input = [&](Shape shape) { return rng_normal(rng, shape, 0.0, 1.0); };
  auto check = [&](LayerPtr layer, const Tensor &x, Mode mode) {
    if (run.wrap)
      layer = run.wrap(std::move(layer));
    record(gradient_check(*layer, x, mode));
  };

  if (run.scale != "model") {
    auto conv = std::make_unique<Conv1D>(2, 3, 3);
    conv->initialize(rng);
    check(std::move(conv), input({2, 7, 2}), Mode::train);
    check(std::make_unique<Relu>(), input({2, 5, 3}), Mode::train);
    check(std::make_unique<MaxPool1D>(2), input({2, 6, 3}), Mode::train);
    check(std::make_unique<BatchNorm>(3), input({4, 5, 3}), Mode::train);
    auto lstm = std::make_unique<Lstm>(3, 4, true);
    lstm->initialize(rng);
    check(std::move(lstm), input({2, 5, 3}), Mode::train);
    check(std::make_unique<Reshape>(Shape{15}), input({2, 5, 3}), Mode::train);
    check(std::make_unique<Dropout>(0.5, 99), input({2, 5, 3}), Mode::train);
    check(std::make_unique<GlobalAvgPool>(), input({2, 5, 3}), Mode::train);
    auto dense = std::make_unique<Dense>(4, 3);
    dense->initialize(rng);
    check(std::move(dense), input({3, 4}), Mode::train);
    check(std::make_unique<Softmax>(), input({3, 4}), Mode::train);
    record(softmax_cross_entropy_check(input({3, 4}), {0, 2, 1}));
  }
  if (run.scale != "layers") {
    LuNetSpec spec;
    spec.levels = {4};
    spec.final_conv_filters = 4;
    spec.input_features = 32;
    spec.init_seed = 5;
    auto model = LuNetModel::build(spec);
    auto report = gradient_check(model, input({2, 32}), {0, 1});
    report.subject = "lunet_1block";
    record(report);
  }

  std::size_t failed = 0;
  for (const auto &row : rows)
    failed += row.passed ? 0 : 1;
  out << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %14s  %s\n", "subject",
                "max_rel_error", "status");
  out << line;
  for (const auto &row : rows) {
    std::snprintf(line, sizeof line, "%-24s %14.3e  %s\n", row.subject.c_str(),
                  row.max_rel_error, row.passed ? "pass" : "FAIL");
    out << line;
  }
  out << rows.size() - failed << "/" << rows.size() << " passed (tolerance "
      << run.tolerance << ")\n";
  return rows;
}

} // namespace lunet
