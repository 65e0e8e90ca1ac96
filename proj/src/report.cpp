// SPDX-License-Identifier: Apache-2.0
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "lunet/error.hpp"
#include "lunet/eval.hpp"

namespace lunet {

namespace {

using nlohmann::json;

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Absent values: `null` in JSON, empty in CSV, "-" in tables.
std::string opt(const std::optional<double> &v, std::string_view absent) {
  return v ? fixed4(*v) : std::string(absent);
}

std::string quoted(const std::string &s) { return json(s).dump(); }

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + "\"";
}

void json_lines(std::ostream &out, const EvalReport &r) {
  for (const auto &f : r.per_fold) {
    const auto &m = f.metrics;
    out << "{\"record\":\"fold\",\"fold\":" << f.fold
        << ",\"acc\":" << opt(m.acc, "null") << ",\"dr\":" << opt(m.dr, "null")
        << ",\"fpr\":" << opt(m.fpr, "null") << ",\"tp\":" << m.tp
        << ",\"tn\":" << m.tn << ",\"fp\":" << m.fp << ",\"fn\":" << m.fn
        << "}\n";
  }
  for (const auto &f : r.per_fold) {
    out << "{\"record\":\"confusion\",\"fold\":" << f.fold << ",\"classes\":[";
    for (std::size_t c = 0; c < f.confusion.classes(); ++c)
      out << (c ? "," : "") << quoted(f.confusion.class_names[c]);
    out << "],\"counts\":[";
    for (std::size_t a = 0; a < f.confusion.classes(); ++a) {
      out << (a ? ",[" : "[");
      for (std::size_t p = 0; p < f.confusion.classes(); ++p)
        out << (p ? "," : "") << f.confusion.counts[a][p];
      out << "]";
    }
    out << "]}\n";
  }
  if (!r.per_fold.empty()) {
    const auto &a = r.aggregate;
    out << "{\"record\":\"aggregate\",\"folds\":" << a.folds
        << ",\"acc\":" << opt(a.acc, "null") << ",\"acc_n\":" << a.acc_n
        << ",\"dr\":" << opt(a.dr, "null") << ",\"dr_n\":" << a.dr_n
        << ",\"fpr\":" << opt(a.fpr, "null") << ",\"fpr_n\":" << a.fpr_n
        << "}\n";
  }
  for (const auto &c : r.per_class)
    out << "{\"record\":\"class\",\"class\":" << quoted(c.name)
        << ",\"dr\":" << opt(c.dr, "null") << ",\"fpr\":" << opt(c.fpr, "null")
        << "}\n";
}

void csv(std::ostream &out, const EvalReport &r) {
  bool first = true;
  auto section = [&] {
    if (!first)
      out << '\n';
    first = false;
  };
  if (!r.per_fold.empty()) {
    section();
    out << "fold,acc,dr,fpr,tp,tn,fp,fn\n";
    for (const auto &f : r.per_fold) {
      const auto &m = f.metrics;
      out << f.fold << ',' << opt(m.acc, "") << ',' << opt(m.dr, "") << ','
          << opt(m.fpr, "") << ',' << m.tp << ',' << m.tn << ',' << m.fp << ','
          << m.fn << '\n';
    }
    section();
    const auto &a = r.aggregate;
    out << "aggregate,folds,acc,acc_n,dr,dr_n,fpr,fpr_n\n"
        << "mean," << a.folds << ',' << opt(a.acc, "") << ',' << a.acc_n << ','
        << opt(a.dr, "") << ',' << a.dr_n << ',' << opt(a.fpr, "") << ','
        << a.fpr_n << '\n';
  }
  if (!r.per_class.empty()) {
    section();
    out << "class,dr,fpr\n";
    for (const auto &c : r.per_class)
      out << csv_field(c.name) << ',' << opt(c.dr, "") << ','
          << opt(c.fpr, "") << '\n';
  }
  if (!r.per_fold.empty()) {
    section();
    out << "fold,actual";
    for (const auto &name : r.per_fold.front().confusion.class_names)
      out << ',' << csv_field(name);
    out << '\n';
    for (const auto &f : r.per_fold)
      for (std::size_t a = 0; a < f.confusion.classes(); ++a) {
        out << f.fold << ',' << csv_field(f.confusion.class_names[a]);
        for (auto n : f.confusion.counts[a])
          out << ',' << n;
        out << '\n';
      }
  }
}

void pretty(std::ostream &out, const EvalReport &r) {
  char line[256];
  if (!r.per_fold.empty()) {
    std::snprintf(line, sizeof line, "%-8s %8s %8s %8s %10s %10s %10s %10s\n",
                  "fold", "acc", "dr", "fpr", "tp", "tn", "fp", "fn");
    out << line;
    for (const auto &f : r.per_fold) {
      const auto &m = f.metrics;
      std::snprintf(line, sizeof line,
                    "%-8zu %8s %8s %8s %10llu %10llu %10llu %10llu\n", f.fold,
                    opt(m.acc, "-").c_str(), opt(m.dr, "-").c_str(),
                    opt(m.fpr, "-").c_str(),
                    static_cast<unsigned long long>(m.tp),
                    static_cast<unsigned long long>(m.tn),
                    static_cast<unsigned long long>(m.fp),
                    static_cast<unsigned long long>(m.fn));
      out << line;
    }
    const auto &a = r.aggregate;
    std::snprintf(line, sizeof line, "%-8s %8s %8s %8s", "average",
                  opt(a.acc, "-").c_str(), opt(a.dr, "-").c_str(),
                  opt(a.fpr, "-").c_str());
    out << line;
    if (a.acc_n != a.folds || a.dr_n != a.folds || a.fpr_n != a.folds)
      out << "  (n: acc " << a.acc_n << ", dr " << a.dr_n << ", fpr "
          << a.fpr_n << " of " << a.folds << ")";
    out << '\n';
  }
  if (!r.per_class.empty()) {
    out << '\n';
    std::snprintf(line, sizeof line, "%-16s %8s %8s\n", "class", "dr", "fpr");
    out << line;
    for (const auto &c : r.per_class) {
      std::snprintf(line, sizeof line, "%-16s %8s %8s\n", c.name.c_str(),
                    opt(c.dr, "-").c_str(), opt(c.fpr, "-").c_str());
      out << line;
    }
  }
}

std::optional<double> read_opt(const json &j, const char *key) {
  const auto &v = j.at(key);
  if (v.is_null())
    return std::nullopt;
  return v.get<double>();
}

} // namespace

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json-lines")
    return ReportFormat::json_lines;
  if (text == "csv")
    return ReportFormat::csv;
  if (text == "pretty" || text == "pretty-table")
    return ReportFormat::pretty;
  throw ConfigError("unknown report format '" + std::string(text) + "'");
}

std::string render_report(const EvalReport &report, ReportFormat format) {
  std::ostringstream out;
  switch (format) {
  case ReportFormat::json_lines:
    json_lines(out, report);
    break;
  case ReportFormat::csv:
    csv(out, report);
    break;
  case ReportFormat::pretty:
    pretty(out, report);
    break;
  }
  return out.str();
}

EvalReport parse_report(std::string_view json_lines) {
  EvalReport report;
  std::istringstream in{std::string(json_lines)};
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty())
      continue;
    try {
      const json j = json::parse(text);
      const auto kind = j.at("record").get<std::string>();
      if (kind == "fold") {
        FoldResult f;
        f.fold = j.at("fold").get<std::size_t>();
        f.metrics.acc = read_opt(j, "acc");
        f.metrics.dr = read_opt(j, "dr");
        f.metrics.fpr = read_opt(j, "fpr");
        f.metrics.tp = j.at("tp").get<std::uint64_t>();
        f.metrics.tn = j.at("tn").get<std::uint64_t>();
        f.metrics.fp = j.at("fp").get<std::uint64_t>();
        f.metrics.fn = j.at("fn").get<std::uint64_t>();
        report.per_fold.push_back(std::move(f));
      } else if (kind == "confusion") {
        const auto fold = j.at("fold").get<std::size_t>();
        bool found = false;
        for (auto &f : report.per_fold)
          if (f.fold == fold) {
            f.confusion.class_names =
                j.at("classes").get<std::vector<std::string>>();
            f.confusion.counts =
                j.at("counts").get<std::vector<std::vector<std::uint64_t>>>();
            found = true;
          }
        if (!found)
          throw FormatError("confusion record for unknown fold " +
                            std::to_string(fold));
      } else if (kind == "aggregate") {
        auto &a = report.aggregate;
        a.folds = j.at("folds").get<std::size_t>();
        a.acc = read_opt(j, "acc");
        a.dr = read_opt(j, "dr");
        a.fpr = read_opt(j, "fpr");
        a.acc_n = j.at("acc_n").get<std::size_t>();
        a.dr_n = j.at("dr_n").get<std::size_t>();
        a.fpr_n = j.at("fpr_n").get<std::size_t>();
      } else if (kind == "class") {
        report.per_class.push_back({j.at("class").get<std::string>(),
                                    read_opt(j, "dr"), read_opt(j, "fpr")});
      } else {
        throw FormatError("unknown record '" + kind + "'");
      }
    } catch (const json::exception &e) {
      throw FormatError("report line " + std::to_string(line_no) + ": " +
                        e.what());
    } catch (const FormatError &e) {
      throw FormatError("report line " + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return report;
}

std::string render_confusion_csv(const ConfusionMatrix &cm) {
  std::ostringstream out;
  out << "actual\\predicted";
  for (const auto &name : cm.class_names)
    out << ',' << csv_field(name);
  out << '\n';
  for (std::size_t a = 0; a < cm.classes(); ++a) {
    out << csv_field(cm.class_names[a]);
    for (auto n : cm.counts[a])
      out << ',' << n;
    out << '\n';
  }
  return out.str();
}

} // namespace lunet
