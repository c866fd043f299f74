#include "ippo/advantage/gae.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include <spdlog/spdlog.h>

#include "ippo/autodiff/tensor.hpp"

namespace ippo::adv {
namespace {

std::atomic<std::uint64_t> g_normalize_calls{0};

void require_finite(std::span<const double> values, const char* what) {
  if (!ad::all_finite(values)) throw ad::NumericalError(std::string("compute_gae: non-finite ") + what);
}

}  // namespace

AdvantageSet compute_gae(const rollout::TrajectoryBatch& batch, double gamma, double lam) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (!(lam >= 0.0 && lam <= 1.0)) throw std::invalid_argument("lam must lie in [0, 1]");
  batch.validate();
  require_finite(batch.rewards, "reward");
  require_finite(batch.old_values, "value");
  require_finite(batch.bootstrap_values, "bootstrap value");

  AdvantageSet out;
  out.adv.assign(batch.samples(), 0.0);
  out.td_err.assign(batch.samples(), 0.0);
  out.value_target.assign(batch.samples(), 0.0);

  for (int actor = 0; actor < batch.n_actors; ++actor) {
    for (int agent = 0; agent < batch.n_agents; ++agent) {
      double next_value = batch.bootstrap_values[static_cast<std::size_t>(actor) * batch.n_agents + agent];
      double next_adv = 0.0;
      for (int t = batch.horizon - 1; t >= 0; --t) {
        const auto s = batch.step_index(actor, t);
        const auto i = batch.sample_index(actor, t, agent);
        const double live = batch.terminals[s] ? 0.0 : 1.0;
        const double delta = batch.rewards[s] + gamma * next_value * live - batch.old_values[i];
        const double a = delta + gamma * lam * live * next_adv;
        out.td_err[i] = delta;
        out.adv[i] = a;
        out.value_target[i] = a + batch.old_values[i];
        next_value = batch.old_values[i];
        next_adv = a;
      }
    }
  }
  require_finite(out.adv, "advantage");
  return out;
}

NormalizedAdvantages normalize_advantages(std::span<const double> advs) {
  g_normalize_calls.fetch_add(1, std::memory_order_relaxed);
  if (advs.size() < 2) throw std::invalid_argument("normalize_advantages needs at least two elements");
  if (!ad::all_finite(advs)) throw ad::NumericalError("normalize_advantages: non-finite advantage");

  const double n = static_cast<double>(advs.size());
  double mean = 0.0;
  for (double a : advs) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : advs) var += (a - mean) * (a - mean);
  var /= n;

  NormalizedAdvantages out;
  out.values.assign(advs.size(), 0.0);
  if (!(var > 0.0)) {
    spdlog::warn("advantages have zero variance; normalized advantages set to zero");
    out.zero_variance = true;
    return out;
  }
  const double sd = std::sqrt(var);
  for (std::size_t i = 0; i < advs.size(); ++i) out.values[i] = (advs[i] - mean) / sd;
  return out;
}

std::uint64_t normalize_call_count() { return g_normalize_calls.load(std::memory_order_relaxed); }

void reset_normalize_call_count() { g_normalize_calls.store(0, std::memory_order_relaxed); }

}  // namespace ippo::adv
