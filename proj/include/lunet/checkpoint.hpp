// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lunet/data.hpp"
#include "lunet/model.hpp"

namespace lunet {

/// What a saved model needs besides its tensors to be applied to new data.
struct CheckpointMeta {
  Task task = Task::binary;
  std::vector<std::string> class_names;
  std::vector<std::string> encoded_columns;
  Standardization standardization;
};

struct LoadedCheckpoint {
  LuNetModel model;
  CheckpointMeta meta;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout (little-endian): "LUNET1", u32 version, spec text, task, class
/// names, encoded columns, standardization, then every named tensor as
/// (name, u32 rank, u64 dims..., f64 values...). Batch-norm running
/// statistics are included.
void save_checkpoint(std::ostream &out, LuNetModel &model,
                     const CheckpointMeta &meta);
void save_checkpoint(const std::filesystem::path &path, LuNetModel &model,
                     const CheckpointMeta &meta);
LoadedCheckpoint load_checkpoint(std::istream &in, const std::string &source);
LoadedCheckpoint load_checkpoint(const std::filesystem::path &path);

} // namespace lunet
