// SPDX-License-Identifier: Apache-2.0
#include "lunet/checkpoint.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "lunet/config.hpp"
#include "lunet/error.hpp"

namespace lunet {

namespace {
constexpr std::string_view kMagic = "LUNET1";
constexpr std::uint64_t kMaxNames = 1 << 24;

void put_strings(std::ostream &out, const std::vector<std::string> &items) {
  io::put_u64(out, items.size());
  for (const auto &s : items)
    io::put_string(out, s);
}

std::vector<std::string> read_strings(io::Reader &r, const char *what) {
  std::vector<std::string> items(r.count(kMaxNames, what));
  for (auto &s : items)
    s = r.string();
  return items;
}

void put_doubles(std::ostream &out, const std::vector<double> &values) {
  io::put_u64(out, values.size());
  for (double v : values)
    io::put_f64(out, v);
}

std::vector<double> read_doubles(io::Reader &r, const char *what) {
  std::vector<double> values(r.count(kMaxNames, what));
  for (auto &v : values)
    v = r.f64();
  return values;
}

} // namespace

void save_checkpoint(std::ostream &out, LuNetModel &model,
                     const CheckpointMeta &meta) {
  io::put_magic(out, kMagic);
  io::put_u32(out, kCheckpointVersion);
  io::put_string(out, spec_to_text(model.spec()));
  io::put_string(out, to_string(meta.task));
  put_strings(out, meta.class_names);
  put_strings(out, meta.encoded_columns);
  put_doubles(out, meta.standardization.mean);
  put_doubles(out, meta.standardization.stddev);
  const auto tensors = model.named_tensors();
  io::put_u64(out, tensors.size());
  for (const auto &[name, t] : tensors) {
    io::put_string(out, name);
    io::put_u32(out, static_cast<std::uint32_t>(t->rank()));
    for (auto d : t->shape())
      io::put_u64(out, d);
    for (double v : t->values())
      io::put_f64(out, v);
  }
}

void save_checkpoint(const std::filesystem::path &path, LuNetModel &model,
                     const CheckpointMeta &meta) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write checkpoint '" + path.string() + "'");
  save_checkpoint(out, model, meta);
  if (!out)
    throw DataError("failed writing checkpoint '" + path.string() + "'");
}

LoadedCheckpoint load_checkpoint(std::istream &in, const std::string &source) {
  io::Reader r(in, source);
  r.expect_magic(kMagic);
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError(source + ": unsupported checkpoint version " +
                      std::to_string(version));
  LuNetSpec spec;
  try {
    spec = spec_from_text(r.string());
  } catch (const ConfigError &e) {
    throw FormatError(source + ": invalid model spec: " + e.what());
  }
  CheckpointMeta meta;
  try {
    meta.task = parse_task(r.string());
  } catch (const ConfigError &e) {
    throw FormatError(source + ": " + e.what());
  }
  meta.class_names = read_strings(r, "class");
  meta.encoded_columns = read_strings(r, "column");
  meta.standardization.mean = read_doubles(r, "mean");
  meta.standardization.stddev = read_doubles(r, "stddev");
  if (meta.class_names.size() != spec.num_classes ||
      meta.encoded_columns.size() != spec.input_features ||
      meta.standardization.mean.size() != meta.standardization.stddev.size() ||
      (!meta.standardization.empty() &&
       meta.standardization.mean.size() != spec.input_features))
    throw FormatError(source + ": metadata disagrees with the model spec");

  LuNetModel model = LuNetModel::build(spec);
  auto tensors = model.named_tensors();
  const auto count = r.count(kMaxNames, "tensor");
  if (count != tensors.size())
    throw FormatError(source + ": expected " + std::to_string(tensors.size()) +
                      " tensors, found " + std::to_string(count));
  for (auto &[name, t] : tensors) {
    const auto stored = r.string();
    if (stored != name)
      throw FormatError(source + ": expected tensor '" + name + "', found '" +
                        stored + "'");
    const auto rank = r.u32();
    Shape shape(rank);
    for (auto &d : shape)
      d = r.u64();
    if (shape != t->shape())
      throw FormatError(source + ": tensor '" + name + "' has shape " +
                        to_string(shape) + ", model expects " +
                        to_string(t->shape()));
    for (auto &v : t->values())
      v = r.f64();
  }
  return {std::move(model), std::move(meta)};
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot open checkpoint '" + path.string() + "'");
  return load_checkpoint(in, path.string());
}

} // namespace lunet
