#include "ippo/rollout/batch.hpp"

#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace ippo::rollout {

void TrajectoryBatch::allocate(int actors, int agents, int steps, std::size_t p_width, std::size_t c_width,
                               std::size_t s_dim) {
  n_actors = actors;
  n_agents = agents;
  horizon = steps;
  policy_width = p_width;
  critic_width = c_width;
  state_dim = s_dim;
  const auto n_steps = this->steps();
  const auto n_samples = samples();
  policy_inputs.assign(n_samples * p_width, 0.0);
  critic_inputs.assign(n_samples * c_width, 0.0);
  actions.assign(n_samples, 0);
  old_logp.assign(n_samples, 0.0);
  old_values.assign(n_samples, 0.0);
  rewards.assign(n_steps, 0.0);
  terminals.assign(n_steps, 0);
  bootstrap_values.assign(static_cast<std::size_t>(actors) * static_cast<std::size_t>(agents), 0.0);
  states.assign(n_steps * s_dim, 0.0);
  episodes.clear();
}

void TrajectoryBatch::validate() const {
  const auto n_steps = steps();
  const auto n_samples = samples();
  auto check = [](bool ok, const char* what) {
    if (!ok) throw std::logic_error(std::string("trajectory batch: bad length for ") + what);
  };
  check(policy_inputs.size() == n_samples * policy_width, "policy_inputs");
  check(critic_inputs.size() == n_samples * critic_width, "critic_inputs");
  check(actions.size() == n_samples, "actions");
  check(old_logp.size() == n_samples, "old_logp");
  check(old_values.size() == n_samples, "old_values");
  check(rewards.size() == n_steps, "rewards");
  check(terminals.size() == n_steps, "terminals");
  check(bootstrap_values.size() == static_cast<std::size_t>(n_actors) * static_cast<std::size_t>(n_agents),
        "bootstrap_values");
  check(states.size() == n_steps * state_dim, "states");
}

void dump_jsonl(std::ostream& os, const TrajectoryBatch& batch) {
  for (int actor = 0; actor < batch.n_actors; ++actor) {
    for (int t = 0; t < batch.horizon; ++t) {
      const auto s = batch.step_index(actor, t);
      nlohmann::json rec;
      rec["actor"] = actor;
      rec["t"] = t;
      rec["reward"] = batch.rewards[s];
      rec["terminal"] = batch.terminals[s] != 0;
      auto& agents = rec["agents"] = nlohmann::json::array();
      for (int a = 0; a < batch.n_agents; ++a) {
        const auto i = batch.sample_index(actor, t, a);
        agents.push_back({{"action", batch.actions[i]}, {"old_logp", batch.old_logp[i]}, {"old_value", batch.old_values[i]}});
      }
      os << rec.dump() << '\n';
    }
  }
}

}  // namespace ippo::rollout
