#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ippo/autodiff/adam.hpp"
#include "ippo/env/factory.hpp"
#include "ippo/losses/config.hpp"
#include "ippo/nn/frames.hpp"
#include "ippo/nn/networks.hpp"
#include "ippo/rollout/collector.hpp"
#include "ippo/util/random.hpp"

namespace ippo::train {

struct EvalResult {
  double mean_return = 0.0;
  double win_rate = 0.0;
  /// Fraction of episodes with at least one cooperative (optimal joint) payoff.
  double cooperative_rate = 0.0;
  int episodes = 0;
};

struct EvalPoint {
  int iteration = 0;
  std::uint64_t env_steps = 0;
  EvalResult result;
};

/// Greedy (argmax) rollouts of `params`; never mutates them.
/// `obs_norm` and `state_norm` are applied when non-null.
EvalResult evaluate(const nn::ParameterSet& params, const env::EnvFactory& factory, const nn::InputOptions& inputs,
                    int n_episodes, std::uint64_t seed, const nn::RunningNormalizer* obs_norm = nullptr,
                    const nn::RunningNormalizer* state_norm = nullptr);

struct TrainOptions {
  loss::AlgoConfig algo;
  env::EnvConfig env;
  std::uint64_t seed = 0;
  int iterations = 500;
  /// Evaluate every `eval_every` iterations (and after the last); 0 disables.
  int eval_every = 10;
  int eval_episodes = 32;
  int workers = 1;
  /// Opaque text stored in checkpoints (the CLI keeps the effective config here).
  std::string metadata;
  /// Where the run state is dumped when an iteration hits a numerical error.
  std::filesystem::path crash_dump;
};

struct IterationStats {
  int iteration = 0;
  std::uint64_t env_steps = 0;
  int updates = 0;
  double policy = 0.0;
  double critic = 0.0;
  double entropy = 0.0;
  double grad_norm = 0.0;
  bool zero_variance_advantages = false;
  /// Moments of the normalized advantages of this iteration's batch.
  double advantage_mean = 0.0;
  double advantage_std = 0.0;
  int episodes = 0;
  double mean_episode_return = 0.0;
};

/// Everything needed to continue a run bit-identically.
struct TrainRunState {
  int iteration = 0;
  std::uint64_t total_env_steps = 0;
  nn::ParameterSet params;
  ad::Adam optimizer;
  Rng rng;
  std::vector<EvalPoint> history;
};

class Trainer {
 public:
  explicit Trainer(TrainOptions options);

  /// collect -> GAE -> normalize once -> minibatch epochs (clip, step).
  IterationStats train_iteration();
  /// Greedy evaluation of the current parameters; appended to the history.
  EvalPoint evaluate_now();
  /// Runs until options().iterations, evaluating on the configured cadence.
  void run(const std::function<void(const IterationStats&, const std::optional<EvalPoint>&)>& on_iteration = {});

  void save_checkpoint(const std::filesystem::path& path) const;
  void load_checkpoint(const std::filesystem::path& path);

  const TrainOptions& options() const { return options_; }
  const TrainRunState& state() const { return state_; }
  const nn::ParameterSet& params() const { return state_.params; }
  const rollout::Collector& collector() const { return collector_; }
  std::uint64_t checksum() const { return state_.params.checksum(); }

 private:
  IterationStats update(const rollout::TrajectoryBatch& batch);

  TrainOptions options_;
  env::EnvFactory factory_;
  rollout::Collector collector_;
  TrainRunState state_;
};

/// Reads only the metadata string of a checkpoint.
std::string read_checkpoint_metadata(const std::filesystem::path& path);

}  // namespace ippo::train
