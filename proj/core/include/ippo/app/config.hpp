#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ippo/env/factory.hpp"
#include "ippo/losses/config.hpp"

namespace ippo::app {

/// Any config problem; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunBlock {
  std::vector<std::uint64_t> seeds{0};
  int iterations = 500;
  int eval_every = 10;
  int eval_episodes = 32;
  std::filesystem::path out_dir = "runs/default";
  /// Used by `train`.
  std::string variant = "ippo";
  /// Used by `ablate`; empty means every variant.
  std::vector<std::string> variants;
  double lr_scale = 0.1;
  int workers = 1;
  int jobs = 1;
};

struct RunConfig {
  env::EnvConfig env;
  loss::AlgoConfig algo;
  RunBlock run;
};

/// Strict parse: unknown keys, wrong types and out-of-range values are
/// rejected with the key path in the message. Missing keys take defaults.
RunConfig parse_config_json(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Effective config with every default spelled out; parse_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);

}  // namespace ippo::app
