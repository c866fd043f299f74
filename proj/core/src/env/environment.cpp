#include "ippo/env/environment.hpp"

#include <cmath>
#include <string>

namespace ippo::env {

void EnvSpec::validate() const {
  if (n_agents < 1) throw EnvError("n_agents must be >= 1");
  if (n_actions < 2) throw EnvError("n_actions must be >= 2");
  if (obs_dim < 1 || state_dim < 1) throw EnvError("observation and state widths must be positive");
  if (episode_limit < 1) throw EnvError("episode_limit must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw EnvError("gamma must lie in [0, 1)");
}

Environment::Environment(EnvSpec spec) : spec_(spec) { spec_.validate(); }

Transition Environment::snapshot() const {
  Transition t;
  t.obs = observations();
  t.state = full_state();
  return t;
}

Transition Environment::reset(std::uint64_t seed) {
  on_reset(seed);
  step_ = 0;
  done_ = false;
  return snapshot();
}

Transition Environment::step(std::span<const int> joint_action) {
  if (done_) throw EnvError(name() + ": step() called on a finished episode; call reset()");
  if (joint_action.size() != static_cast<std::size_t>(spec_.n_agents)) {
    throw EnvError(name() + ": expected " + std::to_string(spec_.n_agents) + " actions, got " +
                   std::to_string(joint_action.size()));
  }
  for (std::size_t a = 0; a < joint_action.size(); ++a) {
    if (joint_action[a] < 0 || joint_action[a] >= spec_.n_actions) {
      throw EnvError(name() + ": action " + std::to_string(joint_action[a]) + " of agent " + std::to_string(a) +
                     " outside [0, " + std::to_string(spec_.n_actions) + ")");
    }
  }
  Transition out;
  on_step(joint_action, out);
  ++step_;
  if (step_ >= spec_.episode_limit && !out.terminal) {
    out.terminal = true;
  }
  if (!out.terminal) {
    out.won.reset();
  } else if (has_win_condition() && !out.won.has_value()) {
    out.won = false;
  }
  if (!std::isfinite(out.reward)) throw EnvError(name() + ": non-finite reward");
  done_ = out.terminal;
  out.obs = observations();
  out.state = full_state();
  return out;
}

void Environment::write_state(io::BinaryWriter& out) const {
  out.str(name());
  out.i64(step_);
  out.u8(done_ ? 1 : 0);
  write_dynamics(out);
}

void Environment::read_state(io::BinaryReader& in) {
  const auto stored = in.str();
  if (stored != name()) throw io::FormatError("environment state for " + stored + " loaded into " + name());
  step_ = static_cast<int>(in.i64());
  done_ = in.u8() != 0;
  read_dynamics(in);
}

}  // namespace ippo::env
