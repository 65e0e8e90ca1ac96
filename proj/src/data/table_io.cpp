// SPDX-License-Identifier: Apache-2.0
#include <fstream>

#include "binary_io.hpp"
#include "lunet/data.hpp"

namespace lunet {

namespace {
constexpr std::string_view kTableMagic = "LUNETTBL1";
constexpr std::uint64_t kMaxCount = 1ULL << 40;
} // namespace

void save_table(const std::filesystem::path &path, const DatasetTable &table) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write table cache '" + path.string() + "'");
  io::put_magic(out, kTableMagic);
  io::put_u64(out, table.rows());
  io::put_u64(out, table.width());
  io::put_u64(out, table.class_names.size());
  for (const auto &c : table.encoded_columns)
    io::put_string(out, c);
  for (const auto &c : table.class_names)
    io::put_string(out, c);
  for (auto l : table.labels)
    io::put_u64(out, l);
  const bool standardized = !table.standardization.empty();
  io::put_u32(out, standardized ? 1 : 0);
  if (standardized) {
    for (double m : table.standardization.mean)
      io::put_f64(out, m);
    for (double s : table.standardization.stddev)
      io::put_f64(out, s);
  }
  for (double v : table.features.values())
    io::put_f64(out, v);
  if (!out)
    throw DataError("failed writing table cache '" + path.string() + "'");
}

DatasetTable load_table(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open table cache '" + path.string() + "'");
  io::Reader r(in, path.string());
  r.expect_magic(kTableMagic);
  DatasetTable table;
  const std::uint64_t rows = r.count(kMaxCount, "row");
  const std::uint64_t width = r.count(1 << 20, "column");
  const std::uint64_t classes = r.count(1 << 20, "class");
  if (rows == 0 || width == 0)
    throw FormatError(path.string() + ": empty table");
  for (std::uint64_t i = 0; i < width; ++i)
    table.encoded_columns.push_back(r.string());
  for (std::uint64_t i = 0; i < classes; ++i)
    table.class_names.push_back(r.string());
  for (std::uint64_t i = 0; i < rows; ++i) {
    const std::uint64_t l = r.u64();
    if (l >= classes)
      throw FormatError(path.string() + ": label out of range");
    table.labels.push_back(l);
  }
  if (r.u32() == 1) {
    for (std::uint64_t i = 0; i < width; ++i)
      table.standardization.mean.push_back(r.f64());
    for (std::uint64_t i = 0; i < width; ++i)
      table.standardization.stddev.push_back(r.f64());
  }
  table.features = Tensor({rows, width});
  for (auto &v : table.features.values())
    v = r.f64();
  return table;
}

} // namespace lunet
