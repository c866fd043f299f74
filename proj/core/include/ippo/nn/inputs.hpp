#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ippo/env/environment.hpp"
#include "ippo/nn/frames.hpp"
#include "ippo/nn/networks.hpp"

namespace ippo::nn {

/// Local critics read each agent's own observation history; centralized
/// critics read the full state history instead.
enum class CriticMode { local, centralized };

std::string to_string(CriticMode mode);
CriticMode parse_critic_mode(const std::string& name);

struct InputOptions {
  int frames = 1;
  bool agent_id = true;
  CriticMode critic_mode = CriticMode::local;
};

/// Network widths implied by an environment and input options.
NetworkDims network_dims(const env::EnvSpec& spec, const InputOptions& options);

/// Turns transitions into stacked policy and critic inputs for every agent.
///
/// Each frame is the (optionally normalized) observation or state with the
/// agent's one-hot id appended. Histories are cleared on begin_episode().
class AgentInputs {
 public:
  AgentInputs(const env::EnvSpec& spec, const InputOptions& options);

  /// Optional normalizers; must outlive this object. Null disables normalization.
  void set_normalizers(const RunningNormalizer* obs, const RunningNormalizer* state);

  void begin_episode(const env::Transition& first);
  void push(const env::Transition& t);

  /// Row-major [n_agents, policy_width()].
  std::vector<double> policy_rows() const;
  /// Row-major [n_agents, critic_width()].
  std::vector<double> critic_rows() const;

  std::size_t policy_width() const;
  std::size_t critic_width() const;
  int n_agents() const { return n_agents_; }

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 private:
  std::vector<double> rows(const std::vector<FrameStack>& stacks) const;

  int n_agents_;
  InputOptions options_;
  const RunningNormalizer* obs_norm_ = nullptr;
  const RunningNormalizer* state_norm_ = nullptr;
  std::vector<FrameStack> policy_;
  std::vector<FrameStack> critic_;
};

}  // namespace ippo::nn
