#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ippo/util/binary_io.hpp"

namespace ippo::env {

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static description of a Dec-POMDP: agent count, action count, observation
/// and state widths, episode cap and discount.
struct EnvSpec {
  int n_agents = 1;
  int n_actions = 2;
  int obs_dim = 1;
  int state_dim = 1;
  int episode_limit = 1;
  double gamma = 0.99;

  void validate() const;
};

struct Transition {
  /// One observation per agent, each of length obs_dim.
  std::vector<std::vector<double>> obs;
  std::vector<double> state;
  /// Team reward shared by every agent.
  double reward = 0.0;
  bool terminal = false;
  /// Set on the terminal step of environments with a win condition.
  std::optional<bool> won;
  /// True on steps where the team attained the coordinated payoff
  /// (joint stag capture, best matrix cell).
  bool cooperative = false;
};

/// Dec-POMDP environment. Owned by one thread at a time.
///
/// step() validates the joint action and the episode state, then defers to
/// the concrete dynamics; terminal is forced at episode_limit.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  const EnvSpec& spec() const { return spec_; }

  Transition reset(std::uint64_t seed);
  Transition step(std::span<const int> joint_action);
  virtual std::vector<double> full_state() const = 0;
  /// Environments with a win condition report `won` on every terminal step.
  virtual bool has_win_condition() const { return false; }

  int episode_step() const { return step_; }
  bool done() const { return done_; }

  virtual std::unique_ptr<Environment> clone() const = 0;

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 protected:
  explicit Environment(EnvSpec spec);

  virtual void on_reset(std::uint64_t seed) = 0;
  /// Applies the joint action and fills reward / terminal / won / cooperative.
  virtual void on_step(std::span<const int> joint_action, Transition& out) = 0;
  virtual std::vector<std::vector<double>> observations() const = 0;
  virtual void write_dynamics(io::BinaryWriter& out) const = 0;
  virtual void read_dynamics(io::BinaryReader& in) = 0;

 private:
  Transition snapshot() const;

  EnvSpec spec_;
  int step_ = 0;
  bool done_ = true;
};

}  // namespace ippo::env
