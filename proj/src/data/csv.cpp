// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include "lunet/data.hpp"
#include "lunet/error.hpp"

namespace lunet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.front())) ||
                        s.front() == '"'))
    s.remove_prefix(1);
  while (!s.empty() && (std::isspace(static_cast<unsigned char>(s.back())) ||
                        s.back() == '"'))
    s.remove_suffix(1);
  return s;
}

void split_fields(std::string_view line, std::vector<std::string_view> &out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

// Role of each file column: feature slot, label, or dropped.
struct ColumnRole {
  enum { feature, label, drop } kind;
  std::size_t slot = 0;
};

} // namespace

RawTable load_csv(std::istream &in, const DatasetSchema &schema,
                  const std::string &source) {
  std::vector<ColumnRole> roles;
  RawTable table;
  for (const auto &name : schema.columns) {
    if (name == schema.label_column) {
      roles.push_back({ColumnRole::label});
      continue;
    }
    auto fc = std::find_if(schema.feature_columns.begin(),
                           schema.feature_columns.end(),
                           [&](const ColumnSpec &c) { return c.name == name; });
    if (fc == schema.feature_columns.end()) {
      roles.push_back({ColumnRole::drop});
      continue;
    }
    roles.push_back({ColumnRole::feature, table.columns.size()});
    table.columns.push_back({fc->name, fc->kind, {}, {}});
  }

  const std::size_t expected = schema.columns.size();
  std::string line;
  std::vector<std::string_view> fields;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (trim(line).empty())
      continue;
    split_fields(line, fields);
    if (first) {
      first = false;
      if (iequals(fields[0], schema.columns[0]))
        continue;
    }
    if (fields.size() != expected)
      throw DataError(source + ": line " + std::to_string(line_no) +
                      ": expected " + std::to_string(expected) +
                      " columns, found " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < expected; ++c) {
      const ColumnRole role = roles[c];
      if (role.kind == ColumnRole::drop)
        continue;
      if (role.kind == ColumnRole::label) {
        table.labels.emplace_back(fields[c]);
        continue;
      }
      RawColumn &col = table.columns[role.slot];
      if (col.kind == ColumnKind::categorical) {
        col.categories.emplace_back(fields[c]);
        continue;
      }
      double v = 0.0;
      const std::string_view f = fields[c];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || f.empty() ||
          !std::isfinite(v))
        throw DataError(source + ": line " + std::to_string(line_no) +
                        ", column '" + schema.columns[c] +
                        "': cannot parse '" + std::string(f) + "' as a number");
      col.numbers.push_back(v);
    }
  }
  return table;
}

RawTable load_csv(const std::filesystem::path &path,
                  const DatasetSchema &schema) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open data file '" + path.string() + "'");
  return load_csv(in, schema, path.string());
}

void append_rows(RawTable &table, RawTable &&more) {
  if (table.columns.empty() && table.labels.empty()) {
    table = std::move(more);
    return;
  }
  if (table.columns.size() != more.columns.size())
    throw DataError("cannot merge tables with different column layouts");
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    auto &dst = table.columns[c];
    auto &src = more.columns[c];
    if (dst.name != src.name || dst.kind != src.kind)
      throw DataError("cannot merge tables: column " + std::to_string(c) +
                      " differs");
    dst.numbers.insert(dst.numbers.end(), src.numbers.begin(),
                       src.numbers.end());
    dst.categories.insert(dst.categories.end(),
                          std::make_move_iterator(src.categories.begin()),
                          std::make_move_iterator(src.categories.end()));
  }
  table.labels.insert(table.labels.end(),
                      std::make_move_iterator(more.labels.begin()),
                      std::make_move_iterator(more.labels.end()));
}

EncodedTable encode_categorical(const RawTable &table) {
  const std::size_t rows = table.rows();
  if (rows == 0)
    throw DataError("cannot encode an empty table");

  struct Plan {
    std::size_t offset;
    std::vector<std::string> vocabulary;
  };
  std::vector<Plan> plans;
  EncodedTable out;
  std::size_t width = 0;
  for (const auto &col : table.columns) {
    Plan plan{width, {}};
    if (col.kind == ColumnKind::numeric) {
      out.encoded_columns.push_back(col.name);
      ++width;
    } else {
      if (col.categories.empty())
        throw DataError("categorical column '" + col.name + "' is empty");
      std::set<std::string> seen(col.categories.begin(), col.categories.end());
      plan.vocabulary.assign(seen.begin(), seen.end());
      for (const auto &v : plan.vocabulary)
        out.encoded_columns.push_back(col.name + "=" + v);
      width += plan.vocabulary.size();
    }
    plans.push_back(std::move(plan));
  }

  out.features = Tensor({rows, width}, 0.0);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const auto &col = table.columns[c];
    const auto &plan = plans[c];
    if (col.kind == ColumnKind::numeric) {
      for (std::size_t r = 0; r < rows; ++r)
        out.features.at(r, plan.offset) = col.numbers[r];
      continue;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      const auto it = std::lower_bound(plan.vocabulary.begin(),
                                       plan.vocabulary.end(),
                                       col.categories[r]);
      out.features.at(r, plan.offset + static_cast<std::size_t>(
                                           it - plan.vocabulary.begin())) = 1.0;
    }
  }
  return out;
}

LabelSet make_labels(const RawTable &table, const DatasetSchema &schema,
                     Task task) {
  LabelSet out;
  out.labels.reserve(table.rows());
  for (const auto &raw : table.labels) {
    const std::size_t cls = schema.multi_class(raw);
    out.labels.push_back(task == Task::binary ? (cls == 0 ? 0 : 1) : cls);
  }
  out.class_names = task == Task::binary
                        ? std::vector<std::string>{"normal", "attack"}
                        : schema.class_names;
  return out;
}

DatasetTable load_dataset(std::span<const std::filesystem::path> paths,
                          const DatasetSchema &schema, Task task) {
  if (paths.empty())
    throw ConfigError("no data files given");
  RawTable raw;
  for (const auto &p : paths)
    append_rows(raw, load_csv(p, schema));
  if (raw.rows() == 0)
    throw DataError("data files contain no rows");
  EncodedTable encoded = encode_categorical(raw);
  LabelSet labels = make_labels(raw, schema, task);
  return {std::move(encoded.features), std::move(labels.labels),
          std::move(encoded.encoded_columns), std::move(labels.class_names),
          {}};
}

} // namespace lunet
