#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

#include "ippo/advantage/gae.hpp"
#include "ippo/autodiff/ops.hpp"
#include "ippo/losses/losses.hpp"
#include "ippo/rollout/collector.hpp"
#include "ippo/train/trainer.hpp"

namespace {

using namespace ippo;

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_MatmulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = ad::Tensor::from({n, 256}, noise(n * 256, 1), true);
  const auto w = ad::Tensor::from({256, 128}, noise(256 * 128, 2), true);
  for (auto _ : state) {
    ad::Tape tape;
    tape.backward(ad::sum(tape, ad::matmul(tape, a, w)));
    benchmark::DoNotOptimize(w.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_MatmulForwardBackward)->Arg(16)->Arg(256)->Arg(1024);

void BM_Conv1dForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = ad::Tensor::from({n, 64, 12}, noise(n * 64 * 12, 3), true);
  const auto w = ad::Tensor::from({128, 64, 3}, noise(128 * 64 * 3, 4), true);
  const auto b = ad::Tensor::zeros({128}, true);
  const auto geo = ad::Conv1dGeometry::valid(1);
  for (auto _ : state) {
    ad::Tape tape;
    tape.backward(ad::sum(tape, ad::conv1d(tape, x, w, b, geo)));
    benchmark::DoNotOptimize(w.grad().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Conv1dForwardBackward)->Arg(16)->Arg(256);

void BM_Objective(benchmark::State& state) {
  loss::AlgoConfig cfg;
  if (state.range(0) == 1) {
    cfg.network.kind = nn::EncoderKind::conv1d;
    cfg.network.channels = {64, 128, 256};
  }
  const auto n = static_cast<std::size_t>(state.range(1));
  const int features = 12;
  const auto params = nn::init_parameters(cfg.encoder(), {features, features, 6}, 5);
  loss::SampleBatch s;
  s.policy_width = s.critic_width = features;
  s.n_agents = 2;
  s.policy_inputs = s.critic_inputs = noise(n * features, 6);
  for (std::size_t i = 0; i < n; ++i) {
    s.actions.push_back(static_cast<int>(i % 6));
    s.agents.push_back(static_cast<int>(i % 2));
  }
  s.old_logp.assign(n, -std::log(6.0));
  s.old_values.assign(n, 0.0);
  s.advantages = noise(n, 7);
  s.value_targets = noise(n, 8);
  for (auto _ : state) {
    ad::Tape tape;
    const auto o = loss::total_objective(tape, params, s, cfg);
    tape.backward(o.value);
    benchmark::DoNotOptimize(o.policy);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  state.SetLabel(state.range(0) == 1 ? "cnn" : "mlp");
}
BENCHMARK(BM_Objective)->Args({0, 16})->Args({1, 16})->Args({0, 1024})->Args({1, 1024});

void BM_Gae(benchmark::State& state) {
  rollout::TrajectoryBatch b;
  b.allocate(8, 3, 128, 1, 1, 1);
  b.rewards = noise(b.steps(), 9);
  b.old_values = noise(b.samples(), 10);
  for (std::size_t i = 0; i < b.terminals.size(); i += 37) b.terminals[i] = 1;
  for (auto _ : state) benchmark::DoNotOptimize(adv::compute_gae(b, 0.99, 0.95));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.samples()));
}
BENCHMARK(BM_Gae);

train::TrainOptions options(env::EnvKind kind) {
  train::TrainOptions o;
  o.env.kind = kind;
  o.eval_every = 0;
  return o;
}

void BM_Collect(benchmark::State& state) {
  const auto o = options(static_cast<env::EnvKind>(state.range(0)));
  train::Trainer t(o);
  rollout::RolloutConfig rc;
  rc.inputs = o.algo.inputs();
  rollout::Collector c(env::make_factory(o.env), rc, 11);
  for (auto _ : state) benchmark::DoNotOptimize(c.collect(t.params()));
  state.SetItemsProcessed(state.iterations() * rc.n_actors * rc.horizon);
  state.SetLabel(env::to_string(o.env.kind));
}
BENCHMARK(BM_Collect)
    ->Arg(static_cast<int>(env::EnvKind::matrix_stag_hunt))
    ->Arg(static_cast<int>(env::EnvKind::grid_stag_hunt))
    ->Arg(static_cast<int>(env::EnvKind::skirmish))
    ->Unit(benchmark::kMillisecond);

void BM_TrainIteration(benchmark::State& state) {
  train::Trainer t(options(static_cast<env::EnvKind>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(t.train_iteration());
  state.SetLabel(env::to_string(t.options().env.kind));
}
BENCHMARK(BM_TrainIteration)
    ->Arg(static_cast<int>(env::EnvKind::matrix_stag_hunt))
    ->Arg(static_cast<int>(env::EnvKind::skirmish))
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
