#include "ippo/nn/inputs.hpp"

#include <stdexcept>

namespace ippo::nn {

std::string to_string(CriticMode mode) { return mode == CriticMode::local ? "local" : "centralized"; }

CriticMode parse_critic_mode(const std::string& name) {
  if (name == "local") return CriticMode::local;
  if (name == "centralized" || name == "central") return CriticMode::centralized;
  throw std::invalid_argument("unknown critic mode '" + name + "' (expected local or centralized)");
}

NetworkDims network_dims(const env::EnvSpec& spec, const InputOptions& options) {
  const int id = options.agent_id ? spec.n_agents : 0;
  NetworkDims dims;
  dims.policy_features = spec.obs_dim + id;
  dims.critic_features = (options.critic_mode == CriticMode::local ? spec.obs_dim : spec.state_dim) + id;
  dims.n_actions = spec.n_actions;
  return dims;
}

AgentInputs::AgentInputs(const env::EnvSpec& spec, const InputOptions& options)
    : n_agents_(spec.n_agents), options_(options) {
  const auto dims = network_dims(spec, options);
  for (int a = 0; a < n_agents_; ++a) {
    policy_.emplace_back(options.frames, static_cast<std::size_t>(dims.policy_features));
    if (options.critic_mode == CriticMode::centralized) {
      critic_.emplace_back(options.frames, static_cast<std::size_t>(dims.critic_features));
    }
  }
}

void AgentInputs::set_normalizers(const RunningNormalizer* obs, const RunningNormalizer* state) {
  obs_norm_ = obs;
  state_norm_ = state;
}

void AgentInputs::begin_episode(const env::Transition& first) {
  for (auto& s : policy_) s.reset();
  for (auto& s : critic_) s.reset();
  push(first);
}

void AgentInputs::push(const env::Transition& t) {
  if (t.obs.size() != static_cast<std::size_t>(n_agents_)) throw std::invalid_argument("transition agent count mismatch");
  auto frame = [&](const std::vector<double>& raw, const RunningNormalizer* norm, int agent) {
    const auto x = norm ? norm->apply(raw) : raw;
    return options_.agent_id ? with_agent_id(x, agent, n_agents_) : x;
  };
  for (int a = 0; a < n_agents_; ++a) {
    const auto idx = static_cast<std::size_t>(a);
    policy_[idx].push(frame(t.obs[idx], obs_norm_, a));
    if (!critic_.empty()) critic_[idx].push(frame(t.state, state_norm_, a));
  }
}

std::vector<double> AgentInputs::rows(const std::vector<FrameStack>& stacks) const {
  std::vector<double> out;
  for (const auto& s : stacks) {
    const auto x = s.stacked();
    out.insert(out.end(), x.begin(), x.end());
  }
  return out;
}

std::vector<double> AgentInputs::policy_rows() const { return rows(policy_); }

std::vector<double> AgentInputs::critic_rows() const { return critic_.empty() ? rows(policy_) : rows(critic_); }

std::size_t AgentInputs::policy_width() const { return policy_.front().width() * static_cast<std::size_t>(options_.frames); }

std::size_t AgentInputs::critic_width() const {
  const auto& s = critic_.empty() ? policy_ : critic_;
  return s.front().width() * static_cast<std::size_t>(options_.frames);
}

void AgentInputs::write_state(io::BinaryWriter& out) const {
  for (const auto& s : policy_) s.write_state(out);
  for (const auto& s : critic_) s.write_state(out);
}

void AgentInputs::read_state(io::BinaryReader& in) {
  for (auto& s : policy_) s.read_state(in);
  for (auto& s : critic_) s.read_state(in);
}

}  // namespace ippo::nn
