// SPDX-License-Identifier: Apache-2.0
// Command-line front end: crossval, train, evaluate, gradcheck.
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "lunet/commands.hpp"
#include "lunet/error.hpp"

namespace {

// Flag name -> config key. Flags are applied after the config file.
const std::map<std::string, std::string> kFlagKeys = {
    {"dataset", "dataset"},         {"data-path", "data_path"},
    {"task", "task"},               {"folds", "folds"},
    {"seed", "seed"},               {"epochs", "train.epochs"},
    {"batch-size", "train.batch_size"}, {"lr", "optimizer.learning_rate"},
    {"output-dir", "output_dir"},   {"checkpoint", "checkpoint"},
};

struct RunFlags {
  std::map<std::string, std::string> values;
  std::string config_file;
  std::vector<std::string> overrides;
};

void add_run_flags(CLI::App &cmd, RunFlags &flags) {
  for (const auto &[flag, key] : kFlagKeys)
    cmd.add_option("--" + flag, flags.values[flag], "sets " + key);
  cmd.add_option("--config", flags.config_file, "key = value config file");
  cmd.add_option("--set", flags.overrides,
                 "extra key=value override (repeatable)");
}

lunet::RunConfig resolve(CLI::App &cmd, const RunFlags &flags) {
  lunet::RunConfig config;
  if (!flags.config_file.empty())
    lunet::apply_config_file(config, flags.config_file);
  for (const auto &[flag, key] : kFlagKeys)
    if (cmd.count("--" + flag) > 0)
      config.set(key, flags.values.at(flag));
  for (const auto &kv : flags.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw lunet::ConfigError("--set expects key=value, got '" + kv + "'");
    config.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"LuNet intrusion-detection trainer"};
  app.require_subcommand(1);

  RunFlags crossval_flags, train_flags, evaluate_flags;
  auto *crossval = app.add_subcommand("crossval", "stratified k-fold cross-validation");
  add_run_flags(*crossval, crossval_flags);
  auto *train = app.add_subcommand("train", "train on a 4/5 split and save a checkpoint");
  add_run_flags(*train, train_flags);
  auto *evaluate = app.add_subcommand("evaluate", "apply a checkpoint to data");
  add_run_flags(*evaluate, evaluate_flags);

  std::string scale = "all";
  auto *gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  gradcheck->add_option("--scale", scale, "layers, model or all")
      ->check(CLI::IsMember({"layers", "model", "all"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*crossval) {
      lunet::cmd_crossval(resolve(*crossval, crossval_flags), std::cout);
    } else if (*train) {
      lunet::cmd_train(resolve(*train, train_flags), std::cout);
    } else if (*evaluate) {
      lunet::cmd_evaluate(resolve(*evaluate, evaluate_flags), std::cout);
    } else if (*gradcheck) {
      lunet::GradCheckRun run;
      run.scale = scale;
      for (const auto &row : lunet::cmd_gradcheck(run, std::cout))
        if (!row.passed)
          return lunet::kGradcheckFailureExit;
    }
  } catch (const lunet::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
