// SPDX-License-Identifier: Apache-2.0
#include "lunet/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lunet/error.hpp"

namespace lunet {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string bad_value(std::string_view key, std::string_view value,
                      std::string_view want) {
  return "config key '" + std::string(key) + "': '" + std::string(value) +
         "' is not " + std::string(want);
}

std::uint64_t to_u64(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size() || value.empty())
    throw ConfigError(bad_value(key, value, "a non-negative integer"));
  return out;
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size() || value.empty() ||
      !std::isfinite(out))
    throw ConfigError(bad_value(key, value, "a finite number"));
  return out;
}

bool to_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1")
    return true;
  if (value == "false" || value == "0")
    return false;
  throw ConfigError(bad_value(key, value, "true or false"));
}

std::vector<std::string_view> split_list(std::string_view value) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = value.find(',');
    out.push_back(trim(value.substr(0, comma)));
    if (comma == std::string_view::npos)
      break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::vector<std::size_t> to_sizes(std::string_view key, std::string_view value) {
  std::vector<std::size_t> out;
  for (auto item : split_list(value))
    out.push_back(to_u64(key, item));
  return out;
}

// Model keys shared by run configs and checkpoint spec echoes.
bool set_spec_key(LuNetSpec &spec, std::string_view key, std::string_view value) {
  if (key == "levels")
    spec.levels = to_sizes(key, value);
  else if (key == "kernel_size")
    spec.kernel_size = to_u64(key, value);
  else if (key == "pool_size")
    spec.pool_size = to_u64(key, value);
  else if (key == "dropout_rate")
    spec.dropout_rate = to_double(key, value);
  else if (key == "final_conv_filters")
    spec.final_conv_filters = to_u64(key, value);
  else if (key == "num_classes")
    spec.num_classes = to_u64(key, value);
  else if (key == "input_features")
    spec.input_features = to_u64(key, value);
  else if (key == "init_seed")
    spec.init_seed = to_u64(key, value);
  else if (key == "bn_momentum")
    spec.bn_momentum = to_double(key, value);
  else if (key == "bn_epsilon")
    spec.bn_epsilon = to_double(key, value);
  else
    return false;
  return true;
}

std::string exact(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

} // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "dataset") {
    if (value != "nsl-kdd" && value != "unsw-nb15" && value != "synthetic")
      throw ConfigError(bad_value(key, value, "nsl-kdd, unsw-nb15 or synthetic"));
    dataset = std::string(value);
  } else if (key == "data_path") {
    data_path.clear();
    for (auto item : split_list(value))
      if (!item.empty())
        data_path.emplace_back(std::string(item));
  } else if (key == "task") {
    task = parse_task(value);
  } else if (key == "folds") {
    folds = to_u64(key, value);
  } else if (key == "seed") {
    seed = to_u64(key, value);
  } else if (key == "output_dir") {
    output_dir = std::string(value);
  } else if (key == "checkpoint") {
    checkpoint = std::string(value);
  } else if (key == "data.subsample") {
    subsample = to_u64(key, value);
  } else if (key.starts_with("model.")) {
    const auto sub = key.substr(6);
    if (sub == "input_features" || sub == "num_classes" || sub == "init_seed" ||
        !set_spec_key(model, sub, value))
      throw ConfigError("unknown config key '" + std::string(key) + "'");
  } else if (key == "train.epochs") {
    train.epochs = to_u64(key, value);
  } else if (key == "train.batch_size") {
    train.batch_size = to_u64(key, value);
  } else if (key == "train.shuffle") {
    train.shuffle = to_bool(key, value);
  } else if (key == "optimizer.learning_rate") {
    optimizer.learning_rate = to_double(key, value);
  } else if (key == "optimizer.rho") {
    optimizer.rho = to_double(key, value);
  } else if (key == "optimizer.epsilon") {
    optimizer.epsilon = to_double(key, value);
  } else if (key == "synthetic.classes") {
    synthetic.classes = to_u64(key, value);
  } else if (key == "synthetic.samples") {
    synthetic.samples = to_u64(key, value);
  } else if (key == "synthetic.features") {
    synthetic.features = to_u64(key, value);
  } else if (key == "synthetic.seed") {
    synthetic.seed = to_u64(key, value);
  } else if (key == "synthetic.separation") {
    synthetic.separation = to_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::validate() const {
  if (folds < 2)
    throw ConfigError("folds must be >= 2, got " + std::to_string(folds));
  if (dataset != "synthetic") {
    if (data_path.empty())
      throw ConfigError("dataset '" + dataset + "' needs --data-path");
    for (const auto &p : data_path)
      if (!std::filesystem::exists(p))
        throw DataError("data file '" + p.string() + "' does not exist");
  }
  train.validate();
  optimizer.validate();
  LuNetSpec probe = model;
  probe.input_features = 1;
  probe.num_classes = 2;
  probe.validate();
}

std::filesystem::path RunConfig::checkpoint_path() const {
  return checkpoint.empty() ? output_dir / "model.lunet" : checkpoint;
}

std::map<std::string, std::string> parse_key_values(std::istream &in,
                                                    const std::string &source) {
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos)
      text = text.substr(0, hash);
    text = trim(text);
    if (text.empty())
      continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos || trim(text.substr(0, eq)).empty())
      throw ConfigError(source + ": line " + std::to_string(line_no) +
                        ": expected key = value");
    out[std::string(trim(text.substr(0, eq)))] =
        std::string(trim(text.substr(eq + 1)));
  }
  return out;
}

void apply_config_file(RunConfig &config, const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path.string() + "'");
  for (const auto &[key, value] : parse_key_values(in, path.string()))
    config.set(key, value);
}

std::string spec_to_text(const LuNetSpec &spec) {
  std::ostringstream out;
  out << "levels=";
  for (std::size_t i = 0; i < spec.levels.size(); ++i)
    out << (i ? "," : "") << spec.levels[i];
  out << "\nkernel_size=" << spec.kernel_size
      << "\npool_size=" << spec.pool_size
      << "\ndropout_rate=" << exact(spec.dropout_rate)
      << "\nfinal_conv_filters=" << spec.final_conv_filters
      << "\nnum_classes=" << spec.num_classes
      << "\ninput_features=" << spec.input_features
      << "\ninit_seed=" << spec.init_seed
      << "\nbn_momentum=" << exact(spec.bn_momentum)
      << "\nbn_epsilon=" << exact(spec.bn_epsilon) << "\n";
  return out.str();
}

LuNetSpec spec_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  LuNetSpec spec;
  for (const auto &[key, value] : parse_key_values(in, "model spec"))
    if (!set_spec_key(spec, key, value))
      throw FormatError("unknown model spec key '" + key + "'");
  spec.validate();
  return spec;
}

} // namespace lunet
