// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "lunet/data.hpp"
#include "lunet/error.hpp"
#include "lunet/rng.hpp"

using namespace lunet;

namespace {

// One NSL-KDD record: 41 features, the label, then the difficulty score.
std::string kdd_row(const std::string &proto, const std::string &label,
                    double first = 0.0) {
  std::ostringstream row;
  row << first << ',' << proto << ",http,SF";
  for (int i = 4; i < 41; ++i)
    row << ',' << i;
  row << ',' << label << ",21";
  return row.str();
}

RawTable kdd_table(const std::vector<std::string> &rows) {
  std::string text;
  for (const auto &r : rows)
    text += r + "\n";
  std::istringstream in(text);
  return load_csv(in, nsl_kdd_schema(), "fixture");
}

std::vector<std::size_t> random_labels(Rng &rng, std::size_t n,
                                       std::size_t classes) {
  std::vector<std::size_t> labels(n);
  for (auto &l : labels)
    l = rng.below(classes);
  return labels;
}

} // namespace

TEST(Schema, FeatureCounts) {
  EXPECT_EQ(nsl_kdd_schema().feature_columns.size(), 41u);
  EXPECT_EQ(unsw_nb15_schema().feature_columns.size(), 42u);
  EXPECT_EQ(nsl_kdd_schema().class_names.size(), 5u);
  EXPECT_EQ(unsw_nb15_schema().class_names.size(), 10u);
  EXPECT_THROW(schema_for("kdd99"), ConfigError);
}

TEST(Schema, NslKddLabels) {
  const auto &s = nsl_kdd_schema();
  EXPECT_EQ(s.class_names[s.multi_class("neptune")], "DoS");
  EXPECT_EQ(s.class_names[s.multi_class("normal")], "Normal");
  EXPECT_EQ(s.class_names[s.multi_class("ipsweep")], "Probe");
  EXPECT_EQ(s.class_names[s.multi_class("guess_passwd")], "R2L");
  EXPECT_EQ(s.class_names[s.multi_class("rootkit")], "U2R");
  try {
    s.multi_class("xyz");
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("xyz"), std::string::npos);
  }
}

TEST(Schema, UnswBlankLabelIsNormal) {
  const auto &s = unsw_nb15_schema();
  EXPECT_EQ(s.class_names[s.multi_class("")], "Normal");
  EXPECT_EQ(s.class_names[s.multi_class(" Generic ")], "Generic");
}

TEST(Csv, ParsesRowsAndDropsColumns) {
  auto raw = kdd_table({kdd_row("tcp", "normal"), kdd_row("udp", "neptune")});
  EXPECT_EQ(raw.rows(), 2u);
  EXPECT_EQ(raw.columns.size(), 41u);
  EXPECT_EQ(raw.labels[1], "neptune");
}

TEST(Csv, SkipsHeaderRow) {
  std::string header = "duration";
  for (std::size_t i = 1; i < nsl_kdd_schema().columns.size(); ++i)
    header += "," + nsl_kdd_schema().columns[i];
  auto raw = kdd_table({header, kdd_row("tcp", "normal")});
  EXPECT_EQ(raw.rows(), 1u);
}

TEST(Csv, ColumnCountMismatchNamesCounts) {
  std::istringstream in("1,2,3\n");
  try {
    load_csv(in, unsw_nb15_schema(), "fixture");
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected 45"), std::string::npos) << msg;
    EXPECT_NE(msg.find("found 3"), std::string::npos) << msg;
  }
}

TEST(Csv, BadNumberNamesLineAndColumn) {
  auto row = kdd_row("tcp", "normal");
  row.replace(0, 1, "abc");
  std::istringstream in(kdd_row("tcp", "normal") + "\n" + row + "\n");
  try {
    load_csv(in, nsl_kdd_schema(), "fixture");
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("duration"), std::string::npos) << msg;
  }
}

TEST(Csv, MissingFile) {
  EXPECT_THROW(load_csv(std::filesystem::path("/nonexistent/x.csv"),
                        nsl_kdd_schema()),
               DataError);
}

TEST(Encode, OneHotLexicographic) {
  auto raw = kdd_table({kdd_row("tcp", "normal"), kdd_row("udp", "normal"),
                        kdd_row("icmp", "normal")});
  auto enc = encode_categorical(raw);
  // 38 numeric + 3 protocols + 1 service + 1 flag
  ASSERT_EQ(enc.encoded_columns.size(), 43u);
  EXPECT_EQ(enc.encoded_columns[1], "protocol_type=icmp");
  EXPECT_EQ(enc.encoded_columns[2], "protocol_type=tcp");
  EXPECT_EQ(enc.encoded_columns[3], "protocol_type=udp");
  EXPECT_EQ(enc.features.at(0, 1), 0.0);
  EXPECT_EQ(enc.features.at(0, 2), 1.0);
  EXPECT_EQ(enc.features.at(0, 3), 0.0);
  // single-valued service column: one indicator, all ones
  EXPECT_EQ(enc.encoded_columns[4], "service=http");
  for (std::size_t r = 0; r < 3; ++r)
    EXPECT_EQ(enc.features.at(r, 4), 1.0);
}

TEST(Encode, PartitionOfUnity) {
  Rng rng(7);
  const std::vector<std::string> protos = {"tcp", "udp", "icmp", "sctp"};
  std::vector<std::string> rows;
  for (int i = 0; i < 50; ++i)
    rows.push_back(kdd_row(protos[rng.below(protos.size())], "normal"));
  auto enc = encode_categorical(kdd_table(rows));
  for (std::size_t r = 0; r < 50; ++r) {
    std::map<std::string, double> sums;
    for (std::size_t c = 0; c < enc.encoded_columns.size(); ++c) {
      const auto &name = enc.encoded_columns[c];
      auto eq = name.find('=');
      if (eq != std::string::npos)
        sums[name.substr(0, eq)] += enc.features.at(r, c);
    }
    ASSERT_EQ(sums.size(), 3u);
    for (const auto &[col, sum] : sums)
      EXPECT_EQ(sum, 1.0) << col;
  }
}

TEST(Labels, BinaryAndMulti) {
  auto raw = kdd_table({kdd_row("tcp", "normal"), kdd_row("tcp", "neptune")});
  auto bin = make_labels(raw, nsl_kdd_schema(), Task::binary);
  EXPECT_EQ(bin.labels, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(bin.class_names, (std::vector<std::string>{"normal", "attack"}));
  auto multi = make_labels(raw, nsl_kdd_schema(), Task::multi);
  EXPECT_EQ(multi.class_names[multi.labels[1]], "DoS");
  auto bad = kdd_table({kdd_row("tcp", "xyz")});
  EXPECT_THROW(make_labels(bad, nsl_kdd_schema(), Task::binary), DataError);
}

TEST(Standardize, ScalarExample) {
  Tensor x({3, 2}, std::vector<double>{2, 5, 4, 5, 6, 5});
  std::vector<std::size_t> all = {0, 1, 2};
  auto s = fit_standardization(x, all);
  auto y = s.apply(x);
  EXPECT_NEAR(y.at(0, 0), -1.2247448713915890, 1e-12);
  EXPECT_NEAR(y.at(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(y.at(2, 0), 1.2247448713915890, 1e-12);
  for (std::size_t r = 0; r < 3; ++r)
    EXPECT_EQ(y.at(r, 1), 0.0); // constant column
}

TEST(Standardize, UsesFitRowsOnly) {
  Tensor x({3, 1}, std::vector<double>{0, 2, 100});
  std::vector<std::size_t> fit = {0, 1};
  auto y = fit_standardization(x, fit).apply(x);
  EXPECT_DOUBLE_EQ(y.at(2, 0), 99.0);
}

TEST(Standardize, TrainFoldMoments) {
  Rng rng(11);
  Tensor x = rng_normal(rng, {200, 6}, 3.0, 5.0);
  std::vector<std::size_t> fit;
  for (std::size_t i = 0; i < 200; i += 2)
    fit.push_back(i);
  auto y = fit_standardization(x, fit).apply(x);
  for (std::size_t c = 0; c < 6; ++c) {
    double mean = 0, var = 0;
    for (auto r : fit)
      mean += y.at(r, c);
    mean /= fit.size();
    for (auto r : fit)
      var += (y.at(r, c) - mean) * (y.at(r, c) - mean);
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_LT(std::abs(std::sqrt(var / fit.size()) - 1.0), 1e-6);
  }
}

TEST(Folds, PerfectStratification) {
  std::vector<std::size_t> labels = {0, 0, 0, 0, 1, 1, 1, 1};
  auto plan = stratified_kfold(labels, 2, 3);
  for (std::size_t f = 0; f < 2; ++f) {
    std::size_t a = 0, b = 0;
    for (auto r : plan.validation_rows(f))
      (labels[r] == 0 ? a : b)++;
    EXPECT_EQ(a, 2u);
    EXPECT_EQ(b, 2u);
  }
}

TEST(Folds, BalanceAndPartition) {
  Rng rng(99);
  for (std::size_t k : {2, 4, 6, 8, 10}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto labels = random_labels(rng, 100 + rng.below(200), 4);
      std::vector<std::size_t> per_class(4, 0);
      for (auto l : labels)
        ++per_class[l];
      bool ok = true;
      for (auto n : per_class)
        ok = ok && n >= k;
      if (!ok)
        continue;
      auto plan = stratified_kfold(labels, k, rng.next_u64());
      for (std::size_t f = 0; f < k; ++f) {
        auto val = plan.validation_rows(f);
        auto train = plan.train_rows(f);
        EXPECT_EQ(val.size() + train.size(), labels.size());
        std::vector<std::size_t> count(4, 0);
        for (auto r : val)
          ++count[labels[r]];
        for (std::size_t c = 0; c < 4; ++c) {
          EXPECT_GE(count[c], per_class[c] / k);
          EXPECT_LE(count[c], (per_class[c] + k - 1) / k);
        }
      }
    }
  }
}

TEST(Folds, SmallClassNamed) {
  std::vector<std::size_t> labels = {0, 0, 0, 0, 0, 1, 1, 1};
  std::vector<std::string> names = {"Normal", "U2R"};
  try {
    stratified_kfold(labels, 4, 1, names);
    FAIL() << "expected DataError";
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("U2R"), std::string::npos);
  }
  EXPECT_THROW(stratified_kfold(labels, 1, 1), ConfigError);
}

TEST(Folds, Deterministic) {
  Rng rng(5);
  auto labels = random_labels(rng, 300, 3);
  EXPECT_EQ(stratified_kfold(labels, 5, 42).assignments,
            stratified_kfold(labels, 5, 42).assignments);
}

TEST(Subsample, Proportional) {
  std::vector<std::size_t> labels(1000, 0);
  for (std::size_t i = 0; i < 100; ++i)
    labels[i * 10] = 1;
  labels[3] = 2;
  auto rows = stratified_subsample(labels, 200, 1, 1);
  std::vector<std::size_t> count(3, 0);
  for (auto r : rows)
    ++count[labels[r]];
  EXPECT_EQ(count[1], 20u);
  EXPECT_EQ(count[2], 1u);
  EXPECT_NEAR(static_cast<double>(rows.size()), 200.0, 1.0);
  EXPECT_TRUE(std::is_sorted(rows.begin(), rows.end()));
}

TEST(Synth, NearestCentroidSeparable) {
  auto t = synth_dataset({2, 64, 16, 10.0, 3});
  std::vector<std::vector<double>> centroid(2, std::vector<double>(16, 0.0));
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t f = 0; f < 16; ++f)
      centroid[t.labels[r]][f] += t.features.at(r, f) / 32.0;
  for (std::size_t r = 0; r < 64; ++r) {
    double d[2] = {0, 0};
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t f = 0; f < 16; ++f)
        d[c] += std::pow(t.features.at(r, f) - centroid[c][f], 2);
    EXPECT_EQ(d[0] < d[1] ? 0u : 1u, t.labels[r]);
  }
}

TEST(Synth, DeterministicAndCoversClasses) {
  auto a = synth_dataset({5, 100, 8, 10.0, 9});
  auto b = synth_dataset({5, 100, 8, 10.0, 9});
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  std::vector<bool> seen(5, false);
  for (auto l : a.labels)
    seen[l] = true;
  for (bool s : seen)
    EXPECT_TRUE(s);
  EXPECT_THROW(synth_dataset({2, 64, 16, 0.0, 1}), ConfigError);
}

TEST(TableCache, RoundTrip) {
  auto t = synth_dataset({3, 30, 5, 4.0, 2});
  std::vector<std::size_t> fit = {0, 1, 2, 3, 4, 5};
  t = standardize(t, fit);
  auto path = std::filesystem::temp_directory_path() / "lunet_table_test.bin";
  save_table(path, t);
  auto u = load_table(path);
  EXPECT_EQ(u.features, t.features);
  EXPECT_EQ(u.labels, t.labels);
  EXPECT_EQ(u.encoded_columns, t.encoded_columns);
  EXPECT_EQ(u.class_names, t.class_names);
  EXPECT_EQ(u.standardization.mean, t.standardization.mean);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("X", 1);
  }
  EXPECT_THROW(load_table(path), FormatError);
  std::filesystem::remove(path);
}
