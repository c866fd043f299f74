#include "ippo/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ippo::loss {
namespace {

void require_aligned(std::size_t n, std::size_t m, const char* what) {
  if (n != m) throw ad::ShapeError(std::string(what) + ": arrays are not aligned");
  if (n == 0) throw ad::ShapeError(std::string(what) + ": no samples");
}

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw ad::NumericalError(std::string(what) + ": non-finite value");
}

ad::Tensor constant(std::span<const double> values) {
  return ad::Tensor::from({values.size()}, {values.begin(), values.end()});
}

ad::Tensor weighted_sum(ad::Tape& tape, const ad::Tensor& terms, std::span<const double> weights) {
  return ad::sum(tape, ad::mul(tape, terms, constant(weights)));
}

}  // namespace

double policy_loss(std::span<const double> new_logp, std::span<const double> old_logp, std::span<const double> adv,
                   double eps_clip, bool clip_enabled) {
  require_aligned(new_logp.size(), old_logp.size(), "policy_loss");
  require_aligned(new_logp.size(), adv.size(), "policy_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < new_logp.size(); ++i) {
    const double ratio = std::exp(new_logp[i] - old_logp[i]);
    require_finite(ratio, "policy_loss ratio");
    const double plain = ratio * adv[i];
    total += clip_enabled ? std::min(plain, std::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip) * adv[i]) : plain;
  }
  return total / static_cast<double>(new_logp.size());
}

double value_loss(std::span<const double> v_new, std::span<const double> v_old, std::span<const double> v_target,
                  double eps_clip, bool clip_enabled, ValueClipMode mode) {
  require_aligned(v_new.size(), v_old.size(), "value_loss");
  require_aligned(v_new.size(), v_target.size(), "value_loss");
  double total = 0.0;
  for (std::size_t i = 0; i < v_new.size(); ++i) {
    require_finite(v_new[i] + v_old[i] + v_target[i], "value_loss");
    const double plain = (v_new[i] - v_target[i]) * (v_new[i] - v_target[i]);
    if (!clip_enabled) {
      total += plain;
      continue;
    }
    const double v_clip = v_old[i] + std::clamp(v_new[i] - v_old[i], -eps_clip, eps_clip);
    const double clipped = (v_clip - v_target[i]) * (v_clip - v_target[i]);
    total += mode == ValueClipMode::paper_min ? std::min(plain, clipped) : std::max(plain, clipped);
  }
  return total / static_cast<double>(v_new.size());
}

double entropy_bonus(std::span<const std::vector<double>> dists) {
  if (dists.empty()) return 0.0;
  double total = 0.0;
  for (const auto& d : dists) {
    for (double p : d) {
      if (p > 0.0) total -= p * std::log(p);
    }
  }
  return total / static_cast<double>(dists.size());
}

ad::Tensor policy_surrogate(ad::Tape& tape, const ad::Tensor& new_logp, std::span<const double> old_logp,
                            std::span<const double> adv, std::span<const double> weights, double eps_clip,
                            bool clip_enabled) {
  require_aligned(new_logp.size(), old_logp.size(), "policy_surrogate");
  require_aligned(new_logp.size(), adv.size(), "policy_surrogate");
  require_aligned(new_logp.size(), weights.size(), "policy_surrogate");
  const auto ratio = ad::exp(tape, ad::sub(tape, new_logp, constant(old_logp)));
  const auto a = constant(adv);
  auto terms = ad::mul(tape, ratio, a);
  if (clip_enabled) {
    terms = ad::minimum(tape, terms, ad::mul(tape, ad::clamp(tape, ratio, 1.0 - eps_clip, 1.0 + eps_clip), a));
  }
  return weighted_sum(tape, terms, weights);
}

ad::Tensor value_term(ad::Tape& tape, const ad::Tensor& v_new, std::span<const double> v_old,
                      std::span<const double> v_target, std::span<const double> weights, double eps_clip,
                      bool clip_enabled, ValueClipMode mode) {
  require_aligned(v_new.size(), v_old.size(), "value_term");
  require_aligned(v_new.size(), v_target.size(), "value_term");
  require_aligned(v_new.size(), weights.size(), "value_term");
  const auto target = constant(v_target);
  auto terms = ad::square(tape, ad::sub(tape, v_new, target));
  if (clip_enabled) {
    const auto old = constant(v_old);
    const auto v_clip = ad::add(tape, old, ad::clamp(tape, ad::sub(tape, v_new, old), -eps_clip, eps_clip));
    const auto clipped = ad::square(tape, ad::sub(tape, v_clip, target));
    if (mode == ValueClipMode::paper_min) {
      terms = ad::minimum(tape, terms, clipped);
    } else {
      terms = ad::scale(tape, ad::minimum(tape, ad::scale(tape, terms, -1.0), ad::scale(tape, clipped, -1.0)), -1.0);
    }
  }
  return weighted_sum(tape, terms, weights);
}

ad::Tensor entropy_term(ad::Tape& tape, const ad::Tensor& log_probs, std::span<const double> weights) {
  if (log_probs.rank() != 2) throw ad::ShapeError("entropy_term expects [N, n_actions] log-probabilities");
  require_aligned(log_probs.dim(0), weights.size(), "entropy_term");
  const auto plogp = ad::sum_last_axis(tape, ad::mul(tape, ad::exp(tape, log_probs), log_probs));
  return ad::scale(tape, weighted_sum(tape, plogp, weights), -1.0);
}

SampleBatch SampleBatch::gather(const rollout::TrajectoryBatch& batch, std::span<const std::size_t> indices,
                                std::span<const double> advantages, std::span<const double> value_targets) {
  if (advantages.size() != batch.samples() || value_targets.size() != batch.samples()) {
    throw ad::ShapeError("SampleBatch::gather: advantage arrays do not match the batch");
  }
  SampleBatch out;
  out.policy_width = batch.policy_width;
  out.critic_width = batch.critic_width;
  out.n_agents = batch.n_agents;
  out.policy_inputs.reserve(indices.size() * batch.policy_width);
  out.critic_inputs.reserve(indices.size() * batch.critic_width);
  for (std::size_t i : indices) {
    if (i >= batch.samples()) throw std::out_of_range("SampleBatch::gather: sample index out of range");
    const auto p = batch.policy_inputs.begin() + static_cast<std::ptrdiff_t>(i * batch.policy_width);
    out.policy_inputs.insert(out.policy_inputs.end(), p, p + static_cast<std::ptrdiff_t>(batch.policy_width));
    const auto c = batch.critic_inputs.begin() + static_cast<std::ptrdiff_t>(i * batch.critic_width);
    out.critic_inputs.insert(out.critic_inputs.end(), c, c + static_cast<std::ptrdiff_t>(batch.critic_width));
    out.actions.push_back(batch.actions[i]);
    out.agents.push_back(batch.agent_of(i));
    out.old_logp.push_back(batch.old_logp[i]);
    out.old_values.push_back(batch.old_values[i]);
    out.advantages.push_back(advantages[i]);
    out.value_targets.push_back(value_targets[i]);
  }
  return out;
}

std::vector<double> SampleBatch::agent_weights() const {
  std::vector<double> counts(static_cast<std::size_t>(n_agents), 0.0);
  for (int a : agents) counts[static_cast<std::size_t>(a)] += 1.0;
  std::vector<double> w(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) w[i] = 1.0 / counts[static_cast<std::size_t>(agents[i])];
  return w;
}

Objective total_objective(ad::Tape& tape, const nn::ParameterSet& params, const SampleBatch& samples,
                          const AlgoConfig& cfg) {
  const auto n = samples.size();
  if (n == 0) throw ad::ShapeError("total_objective: empty sample batch");
  const auto weights = samples.agent_weights();

  const auto log_probs =
      nn::policy_log_probs(tape, params.actor, ad::Tensor::from({n, samples.policy_width}, samples.policy_inputs));
  const auto new_logp = ad::gather(tape, log_probs, samples.actions);
  const auto policy = policy_surrogate(tape, new_logp, samples.old_logp, samples.advantages, weights, cfg.eps_clip,
                                       cfg.policy_clip_enabled);
  const auto entropy = entropy_term(tape, log_probs, weights);

  const auto v_new =
      nn::values(tape, params.critic, ad::Tensor::from({n, samples.critic_width}, samples.critic_inputs));
  const auto critic = value_term(tape, v_new, samples.old_values, samples.value_targets, weights, cfg.eps_clip,
                                 cfg.value_clip_enabled, cfg.value_clip_pessimism);

  auto objective = ad::add(tape, ad::sub(tape, policy, ad::scale(tape, critic, cfg.lambda_critic)),
                           ad::scale(tape, entropy, cfg.lambda_entropy));
  return {objective, policy.item(), critic.item(), entropy.item()};
}

}  // namespace ippo::loss
