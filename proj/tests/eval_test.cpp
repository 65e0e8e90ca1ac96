// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "lunet/error.hpp"
#include "lunet/eval.hpp"
#include "lunet/rng.hpp"

using namespace lunet;

namespace {

ConfusionMatrix binary_cm(std::uint64_t tp, std::uint64_t fn, std::uint64_t fp,
                          std::uint64_t tn) {
  return {{"normal", "attack"}, {{tn, fp}, {fn, tp}}};
}

ConfusionMatrix random_cm(Rng &rng, std::size_t k) {
  ConfusionMatrix cm;
  for (std::size_t c = 0; c < k; ++c)
    cm.class_names.push_back("c" + std::to_string(c));
  cm.counts.assign(k, std::vector<std::uint64_t>(k, 0));
  for (auto &row : cm.counts)
    for (auto &n : row)
      n = rng.below(50);
  return cm;
}

void expect_close(const std::optional<double> &a, const std::optional<double> &b) {
  ASSERT_EQ(a.has_value(), b.has_value());
  if (a)
    EXPECT_NEAR(*a, *b, 5e-5);
}

} // namespace

TEST(Confusion, Examples) {
  std::vector<std::size_t> a = {0, 1}, p = {0, 1};
  auto cm = confusion(a, p, {"n", "a"});
  EXPECT_EQ(cm.counts, (std::vector<std::vector<std::uint64_t>>{{1, 0}, {0, 1}}));
  std::vector<std::size_t> a2 = {0, 0}, p2 = {1, 1};
  EXPECT_EQ(confusion(a2, p2, {"n", "a"}).counts[0][1], 2u);
  auto empty = confusion({}, {}, {"n", "a"});
  EXPECT_EQ(empty.total(), 0u);
  std::vector<std::size_t> bad = {2};
  EXPECT_THROW(confusion(a, bad, {"n", "a"}), ShapeError);
  EXPECT_THROW(confusion(bad, bad, {"n", "a"}), ShapeError);
}

TEST(Confusion, RowSumsAndTotal) {
  Rng rng(3);
  std::vector<std::size_t> a(500), p(500);
  std::vector<std::uint64_t> per_class(4, 0);
  for (std::size_t i = 0; i < 500; ++i) {
    a[i] = rng.below(4);
    p[i] = rng.below(4);
    ++per_class[a[i]];
  }
  auto cm = confusion(a, p, {"a", "b", "c", "d"});
  EXPECT_EQ(cm.total(), 500u);
  for (std::size_t c = 0; c < 4; ++c)
    EXPECT_EQ(cm.actual_count(c), per_class[c]);
}

TEST(Metrics, HandExample) {
  auto m = binary_metrics(binary_cm(90, 10, 5, 95));
  EXPECT_EQ(m.tp, 90u);
  EXPECT_EQ(m.fn, 10u);
  EXPECT_EQ(m.fp, 5u);
  EXPECT_EQ(m.tn, 95u);
  EXPECT_EQ(*m.dr, 0.9);
  EXPECT_EQ(*m.fpr, 0.05);
  EXPECT_EQ(*m.acc, 0.925);
}

TEST(Metrics, AllCorrectAndAbsent) {
  auto m = binary_metrics(binary_cm(10, 0, 0, 10));
  EXPECT_EQ(*m.acc, 1.0);
  EXPECT_EQ(*m.fpr, 0.0);
  auto no_attacks = binary_metrics(binary_cm(0, 0, 3, 7));
  EXPECT_FALSE(no_attacks.dr.has_value());
  EXPECT_TRUE(no_attacks.fpr.has_value());
  auto no_normals = binary_metrics(binary_cm(3, 1, 0, 0));
  EXPECT_FALSE(no_normals.fpr.has_value());
}

TEST(Metrics, RecomputedBitForBit) {
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    auto cm = random_cm(rng, 2 + rng.below(5));
    auto m = binary_metrics(cm);
    const double tp = m.tp, tn = m.tn, fp = m.fp, fn = m.fn;
    if (m.acc)
      EXPECT_EQ(*m.acc, (tp + tn) / (tp + tn + fp + fn));
    if (m.dr)
      EXPECT_EQ(*m.dr, tp / (tp + fn));
    if (m.fpr)
      EXPECT_EQ(*m.fpr, fp / (fp + tn));
    EXPECT_EQ(m.tp + m.tn + m.fp + m.fn, cm.total());
  }
}

TEST(PerClass, HandCollapse) {
  ConfusionMatrix cm{{"a", "b", "c"}, {{2, 1, 0}, {0, 3, 0}, {1, 0, 1}}};
  auto pc = per_class_metrics(cm);
  ASSERT_EQ(pc.size(), 3u);
  EXPECT_DOUBLE_EQ(*pc[0].dr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*pc[0].fpr, 1.0 / 5.0);
}

TEST(PerClass, DiagonalAndAbsent) {
  ConfusionMatrix cm{{"a", "b", "c"}, {{4, 0, 0}, {0, 3, 0}, {0, 0, 0}}};
  auto pc = per_class_metrics(cm);
  EXPECT_EQ(*pc[0].dr, 1.0);
  EXPECT_EQ(*pc[0].fpr, 0.0);
  EXPECT_EQ(*pc[1].dr, 1.0);
  EXPECT_FALSE(pc[2].dr.has_value());
}

TEST(PerClass, MatchesBinaryOnTwoClasses) {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    auto cm = random_cm(rng, 2);
    auto pc = per_class_metrics(cm);
    auto m = binary_metrics(cm);
    EXPECT_EQ(pc[1].dr, m.dr);
    EXPECT_EQ(pc[1].fpr, m.fpr);
  }
}

TEST(Aggregate, Means) {
  auto m = binary_metrics(binary_cm(90, 10, 5, 95));
  std::vector<MetricSet> same = {m, m, m};
  auto agg = aggregate_folds(same);
  EXPECT_DOUBLE_EQ(*agg.acc, *m.acc);
  EXPECT_DOUBLE_EQ(*agg.dr, *m.dr);

  std::vector<MetricSet> two(2);
  two[0].acc = 0.98;
  two[1].acc = 1.00;
  EXPECT_DOUBLE_EQ(*aggregate_folds(two).acc, 0.99);
  EXPECT_FALSE(aggregate_folds(two).dr.has_value());

  std::vector<MetricSet> table(5);
  const double acc[] = {99.09, 99.11, 99.30, 99.34, 99.36};
  for (int i = 0; i < 5; ++i)
    table[i].acc = acc[i];
  EXPECT_NEAR(*aggregate_folds(table).acc, 99.24, 1e-9);
  EXPECT_THROW(aggregate_folds({}), ShapeError);
}

TEST(Aggregate, SkipsAbsentWithCount) {
  std::vector<MetricSet> folds = {binary_metrics(binary_cm(9, 1, 0, 10)),
                                  binary_metrics(binary_cm(0, 0, 1, 9))};
  auto agg = aggregate_folds(folds);
  EXPECT_EQ(agg.dr_n, 1u);
  EXPECT_EQ(*agg.dr, 0.9);
  EXPECT_EQ(agg.fpr_n, 2u);
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(31);
  std::vector<MetricSet> folds;
  for (int i = 0; i < 6; ++i)
    folds.push_back(binary_metrics(random_cm(rng, 2)));
  auto a = aggregate_folds(folds);
  std::reverse(folds.begin(), folds.end());
  auto b = aggregate_folds(folds);
  EXPECT_NEAR(*a.acc, *b.acc, 1e-15);
  EXPECT_NEAR(*a.dr, *b.dr, 1e-15);
}

TEST(Report, JsonLinesRoundTrip) {
  Rng rng(41);
  for (std::size_t k : {2u, 4u}) {
    std::vector<std::pair<std::size_t, ConfusionMatrix>> folds;
    for (std::size_t f = 0; f < 3; ++f)
      folds.emplace_back(f, random_cm(rng, k));
    auto report = make_report(folds);
    EXPECT_EQ(report.per_class.empty(), k == 2);
    auto back = parse_report(render_report(report, ReportFormat::json_lines));
    ASSERT_EQ(back.per_fold.size(), report.per_fold.size());
    for (std::size_t f = 0; f < 3; ++f) {
      const auto &x = report.per_fold[f], &y = back.per_fold[f];
      EXPECT_EQ(x.fold, y.fold);
      EXPECT_EQ(x.confusion, y.confusion);
      EXPECT_EQ(x.metrics.tp, y.metrics.tp);
      EXPECT_EQ(x.metrics.fn, y.metrics.fn);
      expect_close(x.metrics.acc, y.metrics.acc);
      expect_close(x.metrics.dr, y.metrics.dr);
      expect_close(x.metrics.fpr, y.metrics.fpr);
    }
    EXPECT_EQ(back.aggregate.folds, 3u);
    expect_close(report.aggregate.acc, back.aggregate.acc);
    ASSERT_EQ(back.per_class.size(), report.per_class.size());
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
      EXPECT_EQ(back.per_class[c].name, report.per_class[c].name);
      expect_close(back.per_class[c].dr, report.per_class[c].dr);
    }
    // Rendering the parsed report gives the same text.
    EXPECT_EQ(render_report(back, ReportFormat::json_lines),
              render_report(report, ReportFormat::json_lines));
  }
}

TEST(Report, FixedPrecisionAndSections) {
  auto report = make_report({{0, binary_cm(90, 10, 5, 95)}});
  auto text = render_report(report, ReportFormat::json_lines);
  EXPECT_NE(text.find("\"acc\":0.9250"), std::string::npos) << text;
  EXPECT_EQ(text.find("\"record\":\"class\""), std::string::npos);
  auto table = render_report(report, ReportFormat::pretty);
  EXPECT_EQ(table.find("class"), std::string::npos);
  EXPECT_NE(table.find("0.9000"), std::string::npos);
}

TEST(Report, CsvOneHeaderPerTable) {
  ConfusionMatrix cm{{"a", "b", "c"}, {{2, 1, 0}, {0, 3, 0}, {1, 0, 1}}};
  auto report = make_report({{0, cm}, {1, cm}});
  auto text = render_report(report, ReportFormat::csv);
  std::size_t blocks = 1, headers = 0;
  for (std::size_t pos = 0; (pos = text.find("\n\n", pos)) != std::string::npos;
       pos += 2)
    ++blocks;
  for (const char *h : {"fold,acc,", "aggregate,", "class,dr,fpr", "fold,actual"})
    for (std::size_t pos = 0; (pos = text.find(h, pos)) != std::string::npos;
         ++pos)
      ++headers;
  EXPECT_EQ(blocks, 4u);
  EXPECT_EQ(headers, 4u);
  EXPECT_EQ(render_confusion_csv(cm), "actual\\predicted,a,b,c\na,2,1,0\n"
                                      "b,0,3,0\nc,1,0,1\n");
}

TEST(Report, ParseErrors) {
  EXPECT_THROW(parse_report("{\"record\":\"nope\"}\n"), FormatError);
  EXPECT_THROW(parse_report("not json\n"), FormatError);
  EXPECT_THROW(parse_report_format("xml"), ConfigError);
}
