#include "ippo/env/matrix_game.hpp"

#include <algorithm>
#include <cmath>

namespace ippo::env {

void MatrixGameSpec::validate() const {
  if (payoff.size() < 2) throw EnvError("matrix game needs at least 2 actions");
  for (const auto& row : payoff) {
    if (row.size() != payoff.size()) throw EnvError("matrix game payoff must be square");
    for (double v : row) {
      if (!std::isfinite(v)) throw EnvError("matrix game payoff entries must be finite");
    }
  }
  if (horizon < 1) throw EnvError("matrix game horizon must be >= 1");
}

MatrixGameSpec stag_hunt_matrix(double penalty, int horizon, double stag_reward, double hare_reward) {
  return {{{stag_reward, penalty}, {hare_reward, hare_reward}}, horizon};
}

namespace {
EnvSpec matrix_env_spec(const MatrixGameSpec& game, double gamma) {
  game.validate();
  EnvSpec spec;
  spec.n_agents = 2;
  spec.n_actions = static_cast<int>(game.payoff.size());
  spec.obs_dim = 1;
  spec.state_dim = 1;
  spec.episode_limit = game.horizon;
  spec.gamma = gamma;
  return spec;
}
}  // namespace

MatrixGame::MatrixGame(MatrixGameSpec game, double gamma)
    : Environment(matrix_env_spec(game, gamma)), game_(std::move(game)) {
  best_ = game_.payoff[0][0];
  for (const auto& row : game_.payoff) best_ = std::max(best_, *std::max_element(row.begin(), row.end()));
}

void MatrixGame::on_step(std::span<const int> joint_action, Transition& out) {
  out.reward = game_.payoff[static_cast<std::size_t>(joint_action[0])][static_cast<std::size_t>(joint_action[1])];
  out.cooperative = out.reward == best_;
}

std::vector<std::vector<double>> MatrixGame::observations() const { return {{1.0}, {1.0}}; }

}  // namespace ippo::env
