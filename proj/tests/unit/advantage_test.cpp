#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "ippo/advantage/gae.hpp"
#include "ippo/autodiff/tensor.hpp"
#include "test_support.hpp"

namespace ippo::adv {
namespace {

/// Explicit truncated double sum: A_t = sum_l (gamma lam)^l delta_{t+l}, stopping after a terminal.
std::vector<double> brute_force(const rollout::TrajectoryBatch& b, double gamma, double lam) {
  std::vector<double> out(b.samples());
  for (int actor = 0; actor < b.n_actors; ++actor)
    for (int agent = 0; agent < b.n_agents; ++agent) {
      auto delta = [&](int k) {
        const auto s = b.step_index(actor, k);
        const auto i = b.sample_index(actor, k, agent);
        double next = 0.0;
        if (!b.terminals[s]) {
          next = k + 1 < b.horizon ? b.old_values[b.sample_index(actor, k + 1, agent)]
                                   : b.bootstrap_values[static_cast<std::size_t>(actor * b.n_agents + agent)];
        }
        return b.rewards[s] + gamma * next - b.old_values[i];
      };
      for (int t = 0; t < b.horizon; ++t) {
        double a = 0.0;
        for (int l = 0; t + l < b.horizon; ++l) {
          a += std::pow(gamma * lam, l) * delta(t + l);
          if (b.terminals[b.step_index(actor, t + l)]) break;
        }
        out[b.sample_index(actor, t, agent)] = a;
      }
    }
  return out;
}

rollout::TrajectoryBatch single_agent(std::vector<double> rewards, std::vector<double> values,
                                      std::vector<std::uint8_t> terminals, double bootstrap) {
  rollout::TrajectoryBatch b;
  b.allocate(1, 1, static_cast<int>(rewards.size()), 1, 1, 1);
  b.rewards = std::move(rewards);
  b.old_values = std::move(values);
  b.terminals = std::move(terminals);
  b.bootstrap_values = {bootstrap};
  return b;
}

TEST(Gae, LambdaZeroCollapsesToTdError) {
  Rng rng(1);
  const auto b = testing::random_batch(2, 3, 10, 1, 1, 2, rng);
  const auto r = compute_gae(b, 0.99, 0.0);
  for (std::size_t i = 0; i < b.samples(); ++i) EXPECT_EQ(r.adv[i], r.td_err[i]);
}

TEST(Gae, SingleTerminalStep) {
  const auto r = compute_gae(single_agent({1.0}, {0.0}, {1}, 0.0), 0.99, 0.95);
  EXPECT_EQ(r.td_err[0], 1.0);
  EXPECT_EQ(r.adv[0], 1.0);
  EXPECT_EQ(r.value_target[0], 1.0);
}

TEST(Gae, HandComputedThreeStepWindow) {
  // delta = [1, 1, 1]; A2 = 1, A1 = 1 + 0.25 * 1, A0 = 1 + 0.25 * 1.25.
  const auto r = compute_gae(single_agent({1, 1, 1}, {0, 0, 0}, {0, 0, 0}, 0.0), 0.5, 0.5);
  EXPECT_DOUBLE_EQ(r.adv[2], 1.0);
  EXPECT_DOUBLE_EQ(r.adv[1], 1.25);
  EXPECT_DOUBLE_EQ(r.adv[0], 1.3125);
}

TEST(Gae, TerminalCutsBootstrapAndPropagation) {
  // Terminal at t=1 isolates t=2 from t<=1.
  const auto r = compute_gae(single_agent({0, 1, 5}, {0.5, 0.5, 0.5}, {0, 1, 0}, 2.0), 0.9, 1.0);
  EXPECT_DOUBLE_EQ(r.td_err[1], 1.0 - 0.5);
  EXPECT_DOUBLE_EQ(r.td_err[2], 5.0 + 0.9 * 2.0 - 0.5);
  EXPECT_DOUBLE_EQ(r.adv[1], 0.5);
  EXPECT_DOUBLE_EQ(r.adv[0], (0.0 + 0.9 * 0.5 - 0.5) + 0.9 * 0.5);
}

TEST(Gae, RecursionMatchesExplicitSumOnRandomBatches) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto b = testing::random_batch(3, 2, 10, 1, 1, 3, rng, trial % 2 ? 0.3 : 0.05);
    const auto r = compute_gae(b, 0.99, 0.95);
    const auto oracle = brute_force(b, 0.99, 0.95);
    for (std::size_t i = 0; i < b.samples(); ++i) {
      ASSERT_NEAR(r.adv[i], oracle[i], 1e-10);
      ASSERT_EQ(r.value_target[i], r.adv[i] + b.old_values[i]);
    }
  }
}

TEST(Gae, IdenticalValuesGiveIdenticalTdErrorsAcrossAgents) {
  Rng rng(3);
  auto b = testing::random_batch(2, 3, 8, 1, 1, 2, rng);
  for (int actor = 0; actor < 2; ++actor)
    for (int t = 0; t < 8; ++t)
      for (int a = 1; a < 3; ++a) b.old_values[b.sample_index(actor, t, a)] = b.old_values[b.sample_index(actor, t, 0)];
  for (int actor = 0; actor < 2; ++actor)
    for (int a = 1; a < 3; ++a) b.bootstrap_values[static_cast<std::size_t>(actor * 3 + a)] = b.bootstrap_values[static_cast<std::size_t>(actor * 3)];
  const auto r = compute_gae(b, 0.99, 0.95);
  for (int actor = 0; actor < 2; ++actor)
    for (int t = 0; t < 8; ++t)
      for (int a = 1; a < 3; ++a) EXPECT_EQ(r.td_err[b.sample_index(actor, t, a)], r.td_err[b.sample_index(actor, t, 0)]);
}

TEST(Gae, RejectsBadArguments) {
  auto b = single_agent({1.0}, {0.0}, {0}, 0.0);
  EXPECT_THROW(compute_gae(b, 1.0, 0.95), std::invalid_argument);
  EXPECT_THROW(compute_gae(b, 0.99, 1.5), std::invalid_argument);
  b.rewards[0] = std::nan("");
  EXPECT_THROW(compute_gae(b, 0.99, 0.95), ad::NumericalError);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_advantages(std::vector<double>{1, -1}).values, (std::vector<double>{1, -1}));
  EXPECT_EQ(normalize_advantages(std::vector<double>{0, 2}).values, (std::vector<double>{-1, 1}));
  const auto flat = normalize_advantages(std::vector<double>{2, 2, 2});
  EXPECT_TRUE(flat.zero_variance);
  EXPECT_EQ(flat.values, (std::vector<double>{0, 0, 0}));
  EXPECT_THROW(normalize_advantages(std::vector<double>{1}), std::invalid_argument);
}

TEST(Normalize, MomentsAndOrderOnRandomInputs) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::uniform(500, -3.0 * trial, 10.0 + trial, rng);
    const auto y = normalize_advantages(x).values;
    const double n = static_cast<double>(y.size());
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double var = 0;
    for (double v : y) var += (v - mean) * (v - mean);
    EXPECT_LE(std::abs(mean), 1e-8);
    EXPECT_LE(std::abs(std::sqrt(var / n) - 1.0), 1e-6);
    std::vector<std::size_t> ix(x.size()), iy(y.size());
    std::iota(ix.begin(), ix.end(), 0);
    std::iota(iy.begin(), iy.end(), 0);
    std::stable_sort(ix.begin(), ix.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::stable_sort(iy.begin(), iy.end(), [&](auto a, auto b) { return y[a] < y[b]; });
    EXPECT_EQ(ix, iy);
  }
}

TEST(Normalize, CallCounter) {
  reset_normalize_call_count();
  normalize_advantages(std::vector<double>{0, 1});
  normalize_advantages(std::vector<double>{0, 1, 2});
  EXPECT_EQ(normalize_call_count(), 2u);
}

}  // namespace
}  // namespace ippo::adv
