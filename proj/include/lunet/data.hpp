// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lunet/tensor.hpp"

namespace lunet {

enum class ColumnKind { numeric, categorical };
enum class Task { binary, multi };

std::string to_string(Task task);
Task parse_task(std::string_view text);

struct ColumnSpec {
  std::string name;
  ColumnKind kind;
};

/// Column layout and label vocabulary of a pre-featurized dataset file.
struct DatasetSchema {
  std::string name;
  /// Every column of a data row, in file order.
  std::vector<std::string> columns;
  /// Feature columns kept for training, in file order.
  std::vector<ColumnSpec> feature_columns;
  std::string label_column;
  std::vector<std::string> drop_columns;
  /// Multi-class vocabulary; index 0 is the normal class.
  std::vector<std::string> class_names;
  /// Normalized raw label -> index into class_names.
  std::map<std::string, std::size_t> class_map;
  /// Class a blank label cell stands for, if blanks are legal.
  std::optional<std::size_t> blank_label_class;

  /// Canonical lookup key for a raw label value.
  static std::string normalize_label(std::string_view raw);
  /// Class index for a raw label; throws DataError naming unmapped values.
  std::size_t multi_class(std::string_view raw) const;
};

/// 41 features (the trailing difficulty column is dropped); labels are the
/// attack names, grouped into Normal, DoS, Probe, R2L, U2R.
const DatasetSchema &nsl_kdd_schema();
/// The 42 features of the UNSW-NB15 training/testing-set CSVs; `id` and the
/// binary `label` column are dropped and `attack_cat` is the label.
const DatasetSchema &unsw_nb15_schema();
/// Looks up "nsl-kdd" or "unsw-nb15"; throws ConfigError otherwise.
const DatasetSchema &schema_for(std::string_view name);

struct RawColumn {
  std::string name;
  ColumnKind kind;
  std::vector<double> numbers;
  std::vector<std::string> categories;
};

/// Parsed feature columns plus raw label strings, in file row order.
struct RawTable {
  std::vector<RawColumn> columns;
  std::vector<std::string> labels;

  std::size_t rows() const { return labels.size(); }
};

/// Parses comma-separated rows against `schema`. A first row whose leading
/// field names the schema's first column is treated as a header.
RawTable load_csv(std::istream &in, const DatasetSchema &schema,
                  const std::string &source = "<stream>");
RawTable load_csv(const std::filesystem::path &path,
                  const DatasetSchema &schema);
/// Appends the rows of `more` (same schema) to `table`.
void append_rows(RawTable &table, RawTable &&more);

/// Numeric matrix after one-hot expansion.
struct EncodedTable {
  Tensor features;
  std::vector<std::string> encoded_columns;
};

/// Replaces every categorical column with one indicator column per observed
/// value, values in lexicographic order, named "<column>=<value>".
EncodedTable encode_categorical(const RawTable &table);

struct LabelSet {
  std::vector<std::size_t> labels;
  std::vector<std::string> class_names;
};

/// Binary: 0 = normal, 1 = attack. Multi: the schema's vocabulary order.
LabelSet make_labels(const RawTable &table, const DatasetSchema &schema,
                     Task task);

/// Per-column affine map (x - mean) / std. Columns whose std is below 1e-12
/// map to 0.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> stddev;

  Tensor apply(const Tensor &features) const;
  bool empty() const { return mean.empty(); }
};

inline constexpr double kMinStddev = 1e-12;

/// Mean and population standard deviation over `rows` only.
Standardization fit_standardization(const Tensor &features,
                                    std::span<const std::size_t> rows);

struct DatasetTable {
  Tensor features;
  std::vector<std::size_t> labels;
  std::vector<std::string> encoded_columns;
  std::vector<std::string> class_names;
  /// Statistics applied to `features`; empty while unstandardized.
  Standardization standardization;

  std::size_t rows() const { return labels.size(); }
  std::size_t width() const { return encoded_columns.size(); }
};

/// Fits statistics on `fit_rows` and applies them to every row.
DatasetTable standardize(const DatasetTable &table,
                         std::span<const std::size_t> fit_rows);

/// Reads, merges, encodes and labels one or more files of the same schema.
/// The result is not standardized.
DatasetTable load_dataset(std::span<const std::filesystem::path> paths,
                          const DatasetSchema &schema, Task task);

/// Per-sample fold index in [0, k).
struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;

  std::vector<std::size_t> train_rows(std::size_t fold) const;
  std::vector<std::size_t> validation_rows(std::size_t fold) const;
};

/// Within each class, samples are shuffled and dealt round-robin into the k
/// folds, each class starting where the previous one stopped. Throws
/// DataError naming any present class with fewer than k samples.
FoldPlan stratified_kfold(std::span<const std::size_t> labels, std::size_t k,
                          std::uint64_t seed,
                          std::span<const std::string> class_names = {});

/// Class-proportional random subset of `count` rows (largest-remainder
/// allocation, at least `min_per_class` per present class when available),
/// returned in ascending row order.
std::vector<std::size_t> stratified_subsample(std::span<const std::size_t> labels,
                                              std::size_t count,
                                              std::uint64_t seed,
                                              std::size_t min_per_class = 0);

/// Restricts a table to `rows`, in the given order.
DatasetTable select_rows(const DatasetTable &table,
                         std::span<const std::size_t> rows);

struct SynthSpec {
  std::size_t classes = 2;
  std::size_t samples = 64;
  std::size_t features = 16;
  double separation = 10.0;
  std::uint64_t seed = 0;
};

/// Gaussian blobs: class c is centred at `separation` times a random unit
/// vector, with unit-variance noise. Labels cycle through the classes.
DatasetTable synth_dataset(const SynthSpec &spec);

/// Binary cache of an encoded table: "LUNETTBL1", then counts, column and
/// class names, labels, standardization (if any) and the row-major features,
/// all little-endian.
void save_table(const std::filesystem::path &path, const DatasetTable &table);
DatasetTable load_table(const std::filesystem::path &path);

} // namespace lunet
