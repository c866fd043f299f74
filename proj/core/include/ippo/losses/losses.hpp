#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ippo/autodiff/ops.hpp"
#include "ippo/autodiff/tape.hpp"
#include "ippo/losses/config.hpp"
#include "ippo/nn/networks.hpp"
#include "ippo/rollout/batch.hpp"

namespace ippo::loss {

// Plain evaluations (means over samples). The surrogate is maximized and the
// value loss minimized.

double policy_loss(std::span<const double> new_logp, std::span<const double> old_logp, std::span<const double> adv,
                   double eps_clip, bool clip_enabled);

double value_loss(std::span<const double> v_new, std::span<const double> v_old, std::span<const double> v_target,
                  double eps_clip, bool clip_enabled, ValueClipMode mode = ValueClipMode::paper_min);

/// Mean Shannon entropy (nats) of the given distributions; 0 log 0 = 0.
double entropy_bonus(std::span<const std::vector<double>> dists);

// Differentiable forms. Each returns sum_i weights[i] * term_i as a scalar;
// uniform weights 1/N give the mean. old_logp, adv, v_old and v_target are
// constants.

ad::Tensor policy_surrogate(ad::Tape& tape, const ad::Tensor& new_logp, std::span<const double> old_logp,
                            std::span<const double> adv, std::span<const double> weights, double eps_clip,
                            bool clip_enabled);

ad::Tensor value_term(ad::Tape& tape, const ad::Tensor& v_new, std::span<const double> v_old,
                      std::span<const double> v_target, std::span<const double> weights, double eps_clip,
                      bool clip_enabled, ValueClipMode mode);

/// log_probs is [N, n_actions].
ad::Tensor entropy_term(ad::Tape& tape, const ad::Tensor& log_probs, std::span<const double> weights);

/// Samples gathered from a trajectory batch for one gradient step.
struct SampleBatch {
  std::size_t policy_width = 0;
  std::size_t critic_width = 0;
  int n_agents = 0;
  std::vector<double> policy_inputs;
  std::vector<double> critic_inputs;
  std::vector<int> actions;
  std::vector<int> agents;
  std::vector<double> old_logp;
  std::vector<double> old_values;
  std::vector<double> advantages;
  std::vector<double> value_targets;

  std::size_t size() const { return actions.size(); }

  /// `advantages` and `value_targets` are full-batch arrays indexed like the batch samples.
  static SampleBatch gather(const rollout::TrajectoryBatch& batch, std::span<const std::size_t> indices,
                            std::span<const double> advantages, std::span<const double> value_targets);

  /// 1 / (number of samples of the same agent), so that a weighted sum is a
  /// sum over agents of per-agent means.
  std::vector<double> agent_weights() const;
};

struct Objective {
  ad::Tensor value;  // scalar, to maximize
  double policy = 0.0;
  double critic = 0.0;
  double entropy = 0.0;
};

/// sum_a [surrogate_a - lambda_critic * value_loss_a + lambda_entropy * entropy_a].
Objective total_objective(ad::Tape& tape, const nn::ParameterSet& params, const SampleBatch& samples,
                          const AlgoConfig& cfg);

}  // namespace ippo::loss
