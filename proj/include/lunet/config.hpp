// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lunet/data.hpp"
#include "lunet/model.hpp"
#include "lunet/training.hpp"

namespace lunet {

/// Everything a command needs. Populated from a flat `key = value` file with
/// dotted keys, then overridden by command-line flags.
struct RunConfig {
  /// "nsl-kdd", "unsw-nb15" or "synthetic".
  std::string dataset = "synthetic";
  /// One or more files of the same schema; merged in order.
  std::vector<std::filesystem::path> data_path;
  Task task = Task::binary;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "lunet-out";
  /// Empty means <output_dir>/model.lunet.
  std::filesystem::path checkpoint;
  /// Stratified subsample size; 0 keeps every row.
  std::size_t subsample = 0;

  /// input_features, num_classes and init_seed are filled in per run.
  LuNetSpec model;
  TrainConfig train;
  RmsPropConfig optimizer;
  /// Wide enough for the default three-level model.
  SynthSpec synthetic{2, 200, 64, 10.0, 0};

  /// Applies one dotted key; throws ConfigError on unknown keys or values.
  void set(std::string_view key, std::string_view value);
  void validate() const;
  std::filesystem::path checkpoint_path() const;
};

/// Parses `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> parse_key_values(std::istream &in,
                                                    const std::string &source);
void apply_config_file(RunConfig &config, const std::filesystem::path &path);

/// Canonical `key=value` text of a model spec, one key per line.
std::string spec_to_text(const LuNetSpec &spec);
LuNetSpec spec_from_text(std::string_view text);

} // namespace lunet
