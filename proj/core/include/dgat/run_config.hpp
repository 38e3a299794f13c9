#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "dgat/explain.hpp"
#include "dgat/layers.hpp"
#include "dgat/synthetic.hpp"
#include "dgat/train.hpp"

namespace dgat {

// Error with a machine-parseable category (usage, config, data, io).
struct CliError : std::runtime_error {
  CliError(std::string cat, const std::string& msg)
      : std::runtime_error(msg), category(std::move(cat)) {}
  std::string category;
};

// Merged configuration from a `key = value` config file (dotted sections)
// plus --key value flag overrides; flags win.
struct RunConfig {
  std::string data_dir;
  std::string out_dir;
  std::string checkpoint_path;
  int target = -1;
  std::vector<unsigned long long> seeds{0};
  int threads = 1;

  ModelConfig model;
  TrainConfig train_cfg;
  ExplainConfig explain_cfg;
  SyntheticConfig synth;
  double bias_threshold = 0.5;
  int bias_centers = 20;

  // Applies one dotted key (or CLI alias); throws CliError("config", ...) on
  // unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  // Fully resolved configuration as sorted `key = value` lines.
  std::string echo() const;
};

void load_config_file(RunConfig& cfg, const std::string& path);

// args are the tokens after the subcommand: pairs of --key value.
RunConfig parse_run_config(const std::vector<std::string>& args);

}  // namespace dgat
