#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ippo/env/environment.hpp"
#include "ippo/env/factory.hpp"
#include "ippo/nn/frames.hpp"
#include "ippo/nn/inputs.hpp"
#include "ippo/nn/networks.hpp"
#include "ippo/rollout/batch.hpp"
#include "ippo/util/random.hpp"

namespace ippo::rollout {

struct SampledAction {
  int action = 0;
  double logp = 0.0;
};

/// Inverse-CDF draw from a probability vector; returns the index and log(dist[index]).
SampledAction sample_action(std::span<const double> dist, Rng& rng);

/// Index of the largest probability (first on ties).
int greedy_action(std::span<const double> dist);

struct RolloutConfig {
  int n_actors = 8;
  int horizon = 128;
  nn::InputOptions inputs;
  bool norm_input = false;
  /// Worker threads stepping actors; results never depend on this value.
  int workers = 1;

  void validate() const;
};

/// Synchronous collection from n_actors persistent environments.
///
/// Each actor owns its environment, input history and RNG stream (derived from
/// the master seed and the actor index). Episodes carry over between collect()
/// calls. Every call uses one frozen parameter snapshot; actors may run on
/// several threads and their outputs are merged by actor index.
class Collector {
 public:
  Collector(const env::EnvFactory& factory, RolloutConfig config, std::uint64_t seed);

  TrajectoryBatch collect(const nn::ParameterSet& params);

  const env::EnvSpec& env_spec() const { return spec_; }
  const RolloutConfig& config() const { return config_; }
  nn::NetworkDims dims() const { return nn::network_dims(spec_, config_.inputs); }

  /// Frozen during collect(); updated from the observations of each window.
  const nn::RunningNormalizer& obs_normalizer() const { return obs_norm_; }
  const nn::RunningNormalizer& state_normalizer() const { return state_norm_; }

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 private:
  struct Actor {
    std::unique_ptr<env::Environment> env;
    Rng rng;
    nn::AgentInputs inputs;
    bool needs_reset = true;
    EpisodeSummary running;
    nn::RunningNormalizer obs_seen;
    nn::RunningNormalizer state_seen;
  };

  void run_actor(std::size_t index, const nn::ParameterSet& snapshot, TrajectoryBatch& batch,
                 std::vector<EpisodeSummary>& finished);
  void observe(Actor& actor, const env::Transition& t);

  RolloutConfig config_;
  env::EnvSpec spec_;
  std::vector<Actor> actors_;
  nn::RunningNormalizer obs_norm_;
  nn::RunningNormalizer state_norm_;
};

}  // namespace ippo::rollout
