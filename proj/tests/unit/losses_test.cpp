#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "ippo/losses/losses.hpp"
#include "test_support.hpp"

namespace ippo::loss {
namespace {

using Vec = std::vector<double>;

Vec ones(std::size_t n, double v = 1.0) { return Vec(n, v); }

TEST(PolicyLoss, ClippedExamples) {
  EXPECT_DOUBLE_EQ(policy_loss(Vec{std::log(2.0)}, Vec{0.0}, Vec{1.0}, 0.2, true), 1.2);
  EXPECT_DOUBLE_EQ(policy_loss(Vec{std::log(0.5)}, Vec{0.0}, Vec{-1.0}, 0.2, true), -0.8);
  EXPECT_DOUBLE_EQ(policy_loss(Vec{std::log(2.0)}, Vec{0.0}, Vec{1.0}, 0.2, false), 2.0);
}

TEST(PolicyLoss, UnitRatioGivesMeanAdvantage) {
  const Vec logp{-0.3, -1.2, -2.0, -0.1};
  const Vec adv{1.0, -2.0, 0.5, 3.5};
  EXPECT_DOUBLE_EQ(policy_loss(logp, logp, adv, 0.2, true), 0.75);
  EXPECT_DOUBLE_EQ(policy_loss(logp, logp, adv, 0.2, false), 0.75);
}

TEST(PolicyLoss, RejectsBadInput) {
  EXPECT_THROW(policy_loss(Vec{0.0, 0.0}, Vec{0.0}, Vec{1.0, 1.0}, 0.2, true), ad::ShapeError);
  EXPECT_THROW(policy_loss(Vec{1000.0}, Vec{0.0}, Vec{1.0}, 0.2, true), ad::NumericalError);
}

TEST(ValueLoss, Examples) {
  EXPECT_EQ(value_loss(Vec{2.0}, Vec{2.0}, Vec{2.0}, 0.2, true), 0.0);
  EXPECT_DOUBLE_EQ(value_loss(Vec{1.5}, Vec{1.0}, Vec{2.0}, 0.2, true), 0.25);
  EXPECT_DOUBLE_EQ(value_loss(Vec{1.5}, Vec{1.0}, Vec{2.0}, 0.2, true, ValueClipMode::conventional_max), 0.64);
  EXPECT_EQ(value_loss(Vec{0.0}, Vec{5.0}, Vec{1.0}, 0.2, false), 1.0);
  EXPECT_THROW(value_loss(Vec{std::nan("")}, Vec{0.0}, Vec{0.0}, 0.2, true), ad::NumericalError);
}

TEST(Entropy, Examples) {
  const std::vector<Vec> uniform4{{0.25, 0.25, 0.25, 0.25}};
  EXPECT_NEAR(entropy_bonus(uniform4), std::log(4.0), 1e-15);
  EXPECT_EQ(entropy_bonus(std::vector<Vec>{{0.0, 1.0, 0.0}}), 0.0);
  EXPECT_NEAR(entropy_bonus(std::vector<Vec>{{0.5, 0.5}}), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(entropy_bonus(std::vector<Vec>{{0.5, 0.5}, {1.0, 0.0}}), std::numbers::ln2 / 2, 1e-15);
}

TEST(Entropy, TensorFormMatchesPlainForm) {
  Rng rng(5);
  const auto logits = testing::uniform(12, -2.0, 2.0, rng);
  ad::Tape tape;
  const auto lp = ad::log_softmax(tape, ad::Tensor::from({3, 4}, logits));
  std::vector<Vec> dists(3, Vec(4));
  for (std::size_t i = 0; i < 12; ++i) dists[i / 4][i % 4] = std::exp(lp.data()[i]);
  EXPECT_NEAR(entropy_term(tape, lp, ones(3, 1.0 / 3)).item(), entropy_bonus(dists), 1e-14);
}

TEST(PolicySurrogate, ZeroGradientWhenClippedBranchIsActive) {
  const auto logp = ad::Tensor::from({1}, {std::log(2.0)}, true);
  ad::Tape tape;
  const auto s = policy_surrogate(tape, logp, Vec{0.0}, Vec{1.0}, Vec{1.0}, 0.2, true);
  tape.backward(s);
  EXPECT_DOUBLE_EQ(s.item(), 1.2);
  EXPECT_EQ(logp.grad()[0], 0.0);
}

TEST(PolicySurrogate, PessimismAndZeroGradientRegions) {
  Rng rng(6);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 2000; ++trial) {
    const double log_ratio = u(rng);
    const double adv = u(rng);
    const double ratio = std::exp(log_ratio);
    const Vec old{0.0}, a{adv};
    EXPECT_LE(policy_loss(Vec{log_ratio}, old, a, 0.2, true), policy_loss(Vec{log_ratio}, old, a, 0.2, false));

    const auto logp = ad::Tensor::from({1}, {log_ratio}, true);
    ad::Tape tape;
    tape.backward(policy_surrogate(tape, logp, old, a, Vec{1.0}, 0.2, true));
    if ((adv > 0 && ratio > 1.2) || (adv < 0 && ratio < 0.8)) {
      EXPECT_EQ(logp.grad()[0], 0.0);
    } else {
      EXPECT_NEAR(logp.grad()[0], ratio * adv, 1e-12);
    }
  }
}

TEST(ValueTerm, ConventionalMaxIsUpperBoundOfPaperMin) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const auto v_new = testing::uniform(4, -2, 2, rng);
    const auto v_old = testing::uniform(4, -2, 2, rng);
    const auto target = testing::uniform(4, -2, 2, rng);
    const double lo = value_loss(v_new, v_old, target, 0.2, true, ValueClipMode::paper_min);
    const double hi = value_loss(v_new, v_old, target, 0.2, true, ValueClipMode::conventional_max);
    const double plain = value_loss(v_new, v_old, target, 0.2, false);
    EXPECT_LE(lo, plain);
    EXPECT_GE(hi, plain);
    for (auto mode : {ValueClipMode::paper_min, ValueClipMode::conventional_max}) {
      ad::Tape tape;
      const auto t = value_term(tape, ad::Tensor::from({4}, v_new), v_old, target, ones(4, 0.25), 0.2, true, mode);
      EXPECT_NEAR(t.item(), mode == ValueClipMode::paper_min ? lo : hi, 1e-14);
    }
  }
}

TEST(Clipping, HugeEpsilonMatchesUnclipped) {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto logp = testing::uniform(16, -3, 0, rng);
    const auto old = testing::uniform(16, -3, 0, rng);
    const auto adv = testing::uniform(16, -2, 2, rng);
    EXPECT_LE(std::abs(policy_loss(logp, old, adv, 1e6, true) - policy_loss(logp, old, adv, 1e6, false)), 1e-9);
    EXPECT_LE(std::abs(value_loss(logp, old, adv, 1e6, true) - value_loss(logp, old, adv, 1e6, false)), 1e-9);
  }
}

struct ObjectiveFixture {
  AlgoConfig cfg;
  nn::ParameterSet params;
  SampleBatch samples;

  explicit ObjectiveFixture(std::uint64_t seed, int n_agents = 2)
      : params(nn::init_parameters(AlgoConfig{}.encoder(), nn::NetworkDims{5, 7, 3}, seed)) {
    Rng rng(seed);
    const int n_actions = 3;
    auto batch = testing::random_batch(2, n_agents, 3, 5, 7, n_actions, rng);
    const auto adv = testing::uniform(batch.samples(), -1, 1, rng);
    const auto targets = testing::uniform(batch.samples(), -1, 1, rng);
    std::vector<std::size_t> idx(batch.samples());
    std::iota(idx.begin(), idx.end(), 0);
    samples = SampleBatch::gather(batch, idx, adv, targets);
  }
};

TEST(TotalObjective, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    ObjectiveFixture fx(seed);
    fx.cfg.value_clip_pessimism = seed % 2 ? ValueClipMode::conventional_max : ValueClipMode::paper_min;
    Rng rng(seed + 100);
    const auto fn = [&](ad::Tape& t) { return total_objective(t, fx.params, fx.samples, fx.cfg).value; };
    EXPECT_LT(testing::sampled_gradient_error(fn, fx.params.all(), 200, rng), 1e-4) << "seed " << seed;
  }
}

TEST(TotalObjective, TermIsolationAndComposition) {
  ObjectiveFixture fx(11);
  fx.cfg.lambda_critic = 0.0;
  fx.cfg.lambda_entropy = 0.0;
  ad::Tape tape;
  const auto o = total_objective(tape, fx.params, fx.samples, fx.cfg);
  EXPECT_EQ(o.value.item(), o.policy);

  fx.cfg.lambda_critic = 0.7;
  fx.cfg.lambda_entropy = 0.01;
  ad::Tape t2;
  const auto full = total_objective(t2, fx.params, fx.samples, fx.cfg);
  EXPECT_NEAR(full.value.item(), full.policy - 0.7 * full.critic + 0.01 * full.entropy, 1e-14);
}

TEST(TotalObjective, PerAgentMeansAreSummed) {
  ObjectiveFixture fx(12, 3);
  fx.cfg.lambda_critic = 0.0;
  fx.cfg.lambda_entropy = 0.0;
  ad::Tape tape;
  const auto log_probs = nn::policy_log_probs(
      tape, fx.params.actor, ad::Tensor::from({fx.samples.size(), fx.samples.policy_width}, fx.samples.policy_inputs));
  double expected = 0.0;
  for (int agent = 0; agent < 3; ++agent) {
    Vec n, o, a;
    for (std::size_t i = 0; i < fx.samples.size(); ++i) {
      if (fx.samples.agents[i] != agent) continue;
      n.push_back(log_probs.data()[i * 3 + static_cast<std::size_t>(fx.samples.actions[i])]);
      o.push_back(fx.samples.old_logp[i]);
      a.push_back(fx.samples.advantages[i]);
    }
    expected += policy_loss(n, o, a, fx.cfg.eps_clip, true);
  }
  EXPECT_NEAR(total_objective(tape, fx.params, fx.samples, fx.cfg).policy, expected, 1e-13);
}

TEST(TotalObjective, GradientReachesEachNetworkOnlyThroughItsTerms) {
  ObjectiveFixture fx(13);
  fx.cfg.lambda_critic = 0.0;
  {
    ad::Tape tape;
    tape.backward(total_objective(tape, fx.params, fx.samples, fx.cfg).value);
  }
  for (const auto& p : fx.params.critic.parameters()) {
    for (double g : p.value.grad()) EXPECT_EQ(g, 0.0) << p.name;
  }
}

TEST(TotalObjective, SingleAgentIdentityCase) {
  // Deterministic policy, ratio 1, perfect value fit: objective == mean(A).
  AlgoConfig cfg;
  const nn::NetworkDims dims{2, 2, 2};
  auto params = nn::init_parameters(cfg.encoder(), dims, 3);
  params.actor.zero_output_layer();
  params.critic.zero_output_layer();
  params.actor.parameters().back().value.mutable_data()[0] = 200.0;  // bias of action 0

  SampleBatch s;
  s.policy_width = s.critic_width = 2;
  s.n_agents = 1;
  s.policy_inputs = s.critic_inputs = {0.1, 0.2, 0.3, 0.4};
  s.actions = {0, 0};
  s.agents = {0, 0};
  s.old_logp = {0.0, 0.0};
  s.old_values = {0.0, 0.0};
  s.value_targets = {0.0, 0.0};
  s.advantages = {1.5, -0.5};
  ad::Tape tape;
  const auto o = total_objective(tape, params, s, cfg);
  EXPECT_LT(o.entropy, 1e-80);
  EXPECT_EQ(o.critic, 0.0);
  EXPECT_DOUBLE_EQ(o.value.item(), 0.5);
}

}  // namespace
}  // namespace ippo::loss
