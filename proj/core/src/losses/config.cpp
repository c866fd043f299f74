#include "ippo/losses/config.hpp"

#include <cmath>
#include <stdexcept>

namespace ippo::loss {

std::string to_string(ValueClipMode mode) {
  return mode == ValueClipMode::paper_min ? "paper_min" : "conventional_max";
}

ValueClipMode parse_value_clip_mode(const std::string& name) {
  if (name == "paper_min") return ValueClipMode::paper_min;
  if (name == "conventional_max") return ValueClipMode::conventional_max;
  throw std::invalid_argument("unknown value_clip_pessimism '" + name + "' (expected paper_min or conventional_max)");
}

void AlgoConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(std::isfinite(eps_clip) && eps_clip > 0.0, "eps_clip must be > 0");
  require(std::isfinite(lr) && lr >= 0.0, "lr must be >= 0");
  require(mini_epochs >= 1, "mini_epochs must be >= 1");
  require(mini_batch >= 1, "mini_batch must be >= 1");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(lam >= 0.0 && lam <= 1.0, "lam must lie in [0, 1]");
  require(std::isfinite(grad_norm) && grad_norm > 0.0, "grad_norm must be > 0");
  require(std::isfinite(lambda_critic) && lambda_critic >= 0.0, "critic_coef must be >= 0");
  require(std::isfinite(lambda_entropy) && lambda_entropy >= 0.0, "entropy_coef must be >= 0");
  require(frames >= 1, "frames must be >= 1");
  require(horizon >= 1, "steps_num must be >= 1");
  require(n_actors >= 1, "n_actors must be >= 1");
  require(adam_eps > 0.0, "adam_eps must be > 0");
  encoder().validate();
}

nn::EncoderConfig AlgoConfig::encoder() const {
  auto e = network;
  e.frames = frames;
  return e;
}

nn::InputOptions AlgoConfig::inputs() const { return {frames, agent_id, critic_mode}; }

}  // namespace ippo::loss
