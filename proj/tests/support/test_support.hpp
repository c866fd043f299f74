#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "ippo/autodiff/ops.hpp"
#include "ippo/autodiff/tape.hpp"
#include "ippo/rollout/batch.hpp"
#include "ippo/util/random.hpp"

namespace ippo::testing {

inline std::vector<double> uniform(std::size_t n, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b)); }

/// Scalar function of some leaf tensors, evaluated on a fresh tape.
using ScalarFn = std::function<ad::Tensor(ad::Tape&)>;

/// Largest relative error between the analytic gradient of `f` and a central
/// difference, over every coordinate of every leaf.
inline double max_gradient_error(const ScalarFn& f, const std::vector<ad::Tensor>& leaves, double h = 1e-6) {
  for (const auto& t : leaves) t.clear_grad();
  {
    ad::Tape tape;
    tape.backward(f(tape));
  }
  double worst = 0.0;
  for (const auto& t : leaves) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    auto data = t.mutable_data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double x = data[i];
      ad::Tape tp;
      data[i] = x + h;
      const double up = f(tp).item();
      ad::Tape tm;
      data[i] = x - h;
      const double down = f(tm).item();
      data[i] = x;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.empty() ? 0.0 : analytic[i];
      worst = std::max(worst, rel_err(a, numeric));
    }
  }
  return worst;
}

/// Like max_gradient_error, but only over `n_coords` coordinates drawn
/// uniformly from all leaves.
inline double sampled_gradient_error(const ScalarFn& f, const std::vector<ad::Tensor>& leaves, std::size_t n_coords,
                                     Rng& rng, double h = 1e-6) {
  for (const auto& t : leaves) t.clear_grad();
  {
    ad::Tape tape;
    tape.backward(f(tape));
  }
  std::size_t total = 0;
  for (const auto& t : leaves) total += t.size();
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < n_coords; ++k) {
    std::size_t flat = pick(rng);
    std::size_t leaf = 0;
    while (flat >= leaves[leaf].size()) flat -= leaves[leaf++].size();
    const auto& t = leaves[leaf];
    const double a = t.grad().empty() ? 0.0 : t.grad()[flat];
    auto data = t.mutable_data();
    const double x = data[flat];
    ad::Tape tp;
    data[flat] = x + h;
    const double up = f(tp).item();
    ad::Tape tm;
    data[flat] = x - h;
    const double down = f(tm).item();
    data[flat] = x;
    worst = std::max(worst, rel_err(a, (up - down) / (2 * h)));
  }
  return worst;
}

/// Random trajectory batch with the given geometry; every value finite.
inline rollout::TrajectoryBatch random_batch(int actors, int agents, int horizon, std::size_t p_width,
                                             std::size_t c_width, int n_actions, Rng& rng,
                                             double terminal_prob = 0.15) {
  rollout::TrajectoryBatch b;
  b.allocate(actors, agents, horizon, p_width, c_width, 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> act(0, n_actions - 1);
  std::bernoulli_distribution term(terminal_prob);
  for (auto& x : b.policy_inputs) x = u(rng);
  for (auto& x : b.critic_inputs) x = u(rng);
  for (auto& x : b.actions) x = act(rng);
  for (auto& x : b.old_logp) x = -std::log(static_cast<double>(n_actions)) + 0.3 * u(rng);
  for (auto& x : b.old_values) x = u(rng);
  for (auto& x : b.rewards) x = u(rng);
  for (auto& x : b.terminals) x = term(rng) ? 1 : 0;
  for (auto& x : b.bootstrap_values) x = u(rng);
  for (int a = 0; a < actors; ++a) {
    if (b.terminals[b.step_index(a, horizon - 1)]) {
      for (int g = 0; g < agents; ++g) b.bootstrap_values[static_cast<std::size_t>(a * agents + g)] = 0.0;
    }
  }
  return b;
}

}  // namespace ippo::testing
