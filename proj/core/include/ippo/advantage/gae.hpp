#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ippo/rollout/batch.hpp"

namespace ippo::adv {

/// Per-sample arrays in the batch's [actor][step][agent] layout.
struct AdvantageSet {
  std::vector<double> adv;
  std::vector<double> td_err;
  /// adv + old value, taken before normalization.
  std::vector<double> value_target;
};

/// Recursive GAE over every (actor, agent) window of the batch.
///
/// delta_t = r_t + gamma * V_{t+1} * (1 - term_t) - V_t and
/// A_t = delta_t + gamma * lam * (1 - term_t) * A_{t+1}; V_{h} is the
/// bootstrap value of the window and A_{h} = 0.
AdvantageSet compute_gae(const rollout::TrajectoryBatch& batch, double gamma, double lam);

struct NormalizedAdvantages {
  std::vector<double> values;
  /// Set when the input had zero variance and was mapped to zeros.
  bool zero_variance = false;
};

/// (x - mean) / std with the population std, pooled over every element.
/// Needs at least two elements. Each call bumps normalize_call_count().
NormalizedAdvantages normalize_advantages(std::span<const double> advs);

std::uint64_t normalize_call_count();
void reset_normalize_call_count();

}  // namespace ippo::adv
