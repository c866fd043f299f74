#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ippo/app/config.hpp"

namespace ippo::app {

class CommandError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Command-line overrides shared by every command.
struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> out;
  std::optional<std::vector<std::uint64_t>> seeds;
  bool force = false;
  /// eval only.
  std::optional<std::filesystem::path> checkpoint;
  std::optional<int> episodes;
};

/// Parses "0,1,2" into seeds.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

/// Loads the config and applies --out and --seeds.
RunConfig resolve_config(const CommandOptions& options);

/// Output layout below out_dir:
///   config.json                                       effective config
///   checkpoints/<variant>_seed<k>.ckpt                final run state
///   metrics/<experiment>/<env>/<variant>.<metric>.csv
///   metrics/<experiment>/<env>/<metric>.svg
///   summary.json                                      final evaluation per run
/// `train` and `ablate` refuse a non-empty out_dir unless forced.
void command_train(const CommandOptions& options, std::ostream& log);
void command_ablate(const CommandOptions& options, std::ostream& log);
/// Scores a checkpoint with greedy actions and prints a JSON line.
void command_eval(const CommandOptions& options, std::ostream& out);
/// Re-renders plots into <out>/figures from the CSVs under <out>/metrics.
void command_figure(const CommandOptions& options, std::ostream& log);

/// Runs `fn`, printing any error to `err`; returns the process exit status.
int guarded(const std::function<void()>& fn, std::ostream& err);

}  // namespace ippo::app
