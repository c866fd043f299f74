#pragma once

#include <string>

#include "ippo/nn/inputs.hpp"
#include "ippo/nn/networks.hpp"

namespace ippo::loss {

/// Which branch of the clipped value loss is kept.
enum class ValueClipMode { paper_min, conventional_max };

std::string to_string(ValueClipMode mode);
ValueClipMode parse_value_clip_mode(const std::string& name);

/// Algorithm hyperparameters. Per-map values default to the mlp column set
/// (critic coef 1, entropy coef 0.005, frames 1, lr 1e-4, 4 mini epochs,
/// mini batch 1024, 128 steps); the remaining values are fixed across maps.
struct AlgoConfig {
  double eps_clip = 0.2;
  double lambda_critic = 1.0;
  double lambda_entropy = 0.005;
  double lr = 1e-4;
  int mini_epochs = 4;
  int mini_batch = 1024;
  double gamma = 0.99;
  double lam = 0.95;
  double grad_norm = 0.5;
  bool policy_clip_enabled = true;
  bool value_clip_enabled = true;
  ValueClipMode value_clip_pessimism = ValueClipMode::paper_min;
  nn::CriticMode critic_mode = nn::CriticMode::local;
  int frames = 1;
  int horizon = 128;
  int n_actors = 8;
  bool norm_input = false;
  bool agent_id = true;
  nn::EncoderConfig network;
  double adam_eps = 1e-5;

  void validate() const;
  nn::EncoderConfig encoder() const;
  nn::InputOptions inputs() const;
};

}  // namespace ippo::loss
