#pragma once

#include <vector>

#include "ippo/env/environment.hpp"

namespace ippo::env {

/// Two-player repeated matrix game; payoff[i][j] is the team reward when agent 0
/// plays i and agent 1 plays j.
struct MatrixGameSpec {
  std::vector<std::vector<double>> payoff;
  int horizon = 10;

  void validate() const;
};

/// Stag hunt with action 0 = stag, 1 = hare: payoff[stag][stag] = stag_reward,
/// payoff[stag][hare] = penalty, payoff[hare][*] = hare_reward.
MatrixGameSpec stag_hunt_matrix(double penalty, int horizon = 10, double stag_reward = 4.0, double hare_reward = 1.0);

/// Stateless repeated game: every observation and the state are the constant [1].
class MatrixGame final : public Environment {
 public:
  explicit MatrixGame(MatrixGameSpec game, double gamma = 0.99);

  std::string name() const override { return "matrix_game"; }
  std::vector<double> full_state() const override { return {1.0}; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MatrixGame>(*this); }

  const MatrixGameSpec& game() const { return game_; }
  double best_payoff() const { return best_; }

 protected:
  void on_reset(std::uint64_t) override {}
  void on_step(std::span<const int> joint_action, Transition& out) override;
  std::vector<std::vector<double>> observations() const override;
  void write_dynamics(io::BinaryWriter&) const override {}
  void read_dynamics(io::BinaryReader&) override {}

 private:
  MatrixGameSpec game_;
  double best_ = 0.0;
};

}  // namespace ippo::env
