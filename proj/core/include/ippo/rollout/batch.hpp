#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

namespace ippo::rollout {

struct EpisodeSummary {
  double ret = 0.0;
  int length = 0;
  std::optional<bool> won;
  int cooperative_steps = 0;
};

/// Fixed-length rollout storage for n_actors parallel environments.
///
/// Per-sample arrays are laid out [actor][step][agent] and per-step arrays
/// [actor][step]. Rewards are the team reward and are stored once per step.
/// Each actor's window may begin and end mid-episode; `bootstrap_values`
/// holds V of the observation following the window (0 after a terminal).
struct TrajectoryBatch {
  int n_actors = 0;
  int n_agents = 0;
  int horizon = 0;
  std::size_t policy_width = 0;
  std::size_t critic_width = 0;
  std::size_t state_dim = 0;

  std::vector<double> policy_inputs;
  std::vector<double> critic_inputs;
  std::vector<int> actions;
  std::vector<double> old_logp;
  std::vector<double> old_values;
  std::vector<double> rewards;
  std::vector<std::uint8_t> terminals;
  std::vector<double> bootstrap_values;  // [actor][agent]
  std::vector<double> states;            // [actor][step][state_dim]

  std::vector<EpisodeSummary> episodes;  // completed inside this window, actor order

  std::size_t steps() const { return static_cast<std::size_t>(n_actors) * static_cast<std::size_t>(horizon); }
  std::size_t samples() const { return steps() * static_cast<std::size_t>(n_agents); }
  std::size_t step_index(int actor, int t) const {
    return static_cast<std::size_t>(actor) * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t);
  }
  std::size_t sample_index(int actor, int t, int agent) const {
    return step_index(actor, t) * static_cast<std::size_t>(n_agents) + static_cast<std::size_t>(agent);
  }
  int agent_of(std::size_t sample) const { return static_cast<int>(sample % static_cast<std::size_t>(n_agents)); }

  /// Allocates every array for the given geometry.
  void allocate(int actors, int agents, int steps, std::size_t p_width, std::size_t c_width, std::size_t s_dim);
  /// Checks array lengths against the geometry; throws std::logic_error.
  void validate() const;
};

/// Writes one JSON object per timestep and actor (line-delimited).
void dump_jsonl(std::ostream& os, const TrajectoryBatch& batch);

}  // namespace ippo::rollout
