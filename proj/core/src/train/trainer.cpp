#include "ippo/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <spdlog/spdlog.h>

#include "ippo/advantage/gae.hpp"
#include "ippo/autodiff/parameters.hpp"
#include "ippo/losses/losses.hpp"
#include "ippo/nn/inputs.hpp"

namespace ippo::train {
namespace {

constexpr char kCheckpointMagic[9] = "IPPOCKPT";
constexpr std::uint32_t kCheckpointVersion = 1;

// Seed streams of one run.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kRolloutStream = 2;
constexpr std::uint64_t kShuffleStream = 3;
constexpr std::uint64_t kEvalStream = 4;

rollout::RolloutConfig rollout_config(const TrainOptions& o) {
  rollout::RolloutConfig rc;
  rc.n_actors = o.algo.n_actors;
  rc.horizon = o.algo.horizon;
  rc.inputs = o.algo.inputs();
  rc.norm_input = o.algo.norm_input;
  rc.workers = o.workers;
  return rc;
}

TrainRunState initial_state(const TrainOptions& o, const nn::NetworkDims& dims) {
  auto params = nn::init_parameters(o.algo.encoder(), dims, derive_seed(o.seed, kInitStream));
  ad::Adam adam(params.all(), {o.algo.lr, 0.9, 0.999, o.algo.adam_eps});
  return {0, 0, std::move(params), std::move(adam), Rng(derive_seed(o.seed, kShuffleStream)), {}};
}

const TrainOptions& validated(const TrainOptions& o) {
  o.algo.validate();
  if (o.iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (o.eval_every < 0) throw std::invalid_argument("eval_every must be >= 0");
  if (o.eval_episodes < 1) throw std::invalid_argument("eval_episodes must be >= 1");
  return o;
}

void shuffle(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

EvalResult evaluate(const nn::ParameterSet& params, const env::EnvFactory& factory, const nn::InputOptions& inputs,
                    int n_episodes, std::uint64_t seed, const nn::RunningNormalizer* obs_norm,
                    const nn::RunningNormalizer* state_norm) {
  if (n_episodes < 1) throw std::invalid_argument("evaluate needs n_episodes >= 1");
  auto env = factory();
  const auto& spec = env->spec();
  const auto n_agents = static_cast<std::size_t>(spec.n_agents);
  const auto n_actions = static_cast<std::size_t>(spec.n_actions);

  EvalResult out;
  out.episodes = n_episodes;
  std::vector<int> joint(n_agents);
  for (int ep = 0; ep < n_episodes; ++ep) {
    nn::AgentInputs rows(spec, inputs);
    rows.set_normalizers(obs_norm, state_norm);
    rows.begin_episode(env->reset(derive_seed(seed, static_cast<std::uint64_t>(ep))));
    double ret = 0.0;
    bool cooperative = false;
    bool won = false;
    while (true) {
      ad::Tape tape;
      const auto logp = nn::policy_log_probs(tape, params.actor,
                                             ad::Tensor::from({n_agents, rows.policy_width()}, rows.policy_rows()));
      for (std::size_t a = 0; a < n_agents; ++a) {
        joint[a] = rollout::greedy_action(logp.data().subspan(a * n_actions, n_actions));
      }
      const auto t = env->step(joint);
      ret += t.reward;
      cooperative = cooperative || t.cooperative;
      if (t.terminal) {
        won = t.won.value_or(false);
        break;
      }
      rows.push(t);
    }
    out.mean_return += ret;
    out.win_rate += won ? 1.0 : 0.0;
    out.cooperative_rate += cooperative ? 1.0 : 0.0;
  }
  out.mean_return /= n_episodes;
  out.win_rate /= n_episodes;
  out.cooperative_rate /= n_episodes;
  return out;
}

Trainer::Trainer(TrainOptions options)
    : options_(validated(options)),
      factory_(env::make_factory(options_.env)),
      collector_(factory_, rollout_config(options_), derive_seed(options_.seed, kRolloutStream)),
      state_(initial_state(options_, collector_.dims())) {}

IterationStats Trainer::train_iteration() {
  try {
    const auto batch = collector_.collect(state_.params);
    auto stats = update(batch);
    state_.iteration += 1;
    state_.total_env_steps += batch.steps();
    stats.iteration = state_.iteration;
    stats.env_steps = state_.total_env_steps;
    stats.episodes = static_cast<int>(batch.episodes.size());
    for (const auto& e : batch.episodes) stats.mean_episode_return += e.ret;
    if (!batch.episodes.empty()) stats.mean_episode_return /= static_cast<double>(batch.episodes.size());
    return stats;
  } catch (const ad::NumericalError& e) {
    if (!options_.crash_dump.empty()) {
      spdlog::error("numerical error at iteration {}: {}; dumping state to {}", state_.iteration + 1, e.what(),
                    options_.crash_dump.string());
      save_checkpoint(options_.crash_dump);
    }
    throw;
  }
}

IterationStats Trainer::update(const rollout::TrajectoryBatch& batch) {
  const auto& cfg = options_.algo;
  const auto advs = adv::compute_gae(batch, cfg.gamma, cfg.lam);
  const auto normalized = adv::normalize_advantages(advs.adv);

  IterationStats stats;
  stats.zero_variance_advantages = normalized.zero_variance;
  const auto& nv = normalized.values;
  stats.advantage_mean = std::accumulate(nv.begin(), nv.end(), 0.0) / static_cast<double>(nv.size());
  for (double v : nv) stats.advantage_std += (v - stats.advantage_mean) * (v - stats.advantage_mean);
  stats.advantage_std = std::sqrt(stats.advantage_std / static_cast<double>(nv.size()));
  const auto n = batch.samples();
  const auto mb = std::min<std::size_t>(static_cast<std::size_t>(cfg.mini_batch), n);
  std::vector<std::size_t> order(n);
  const auto params = state_.params.all();

  for (int epoch = 0; epoch < cfg.mini_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order, state_.rng);
    for (std::size_t start = 0; start < n; start += mb) {
      const auto count = std::min(mb, n - start);
      const auto samples = loss::SampleBatch::gather(batch, std::span(order).subspan(start, count), normalized.values,
                                                     advs.value_target);
      ad::Tape tape;
      const auto objective = loss::total_objective(tape, state_.params, samples, cfg);
      state_.optimizer.zero_grad();
      tape.backward(ad::scale(tape, objective.value, -1.0));
      stats.grad_norm += ad::clip_global_grad_norm(params, cfg.grad_norm);
      state_.optimizer.step();
      stats.policy += objective.policy;
      stats.critic += objective.critic;
      stats.entropy += objective.entropy;
      stats.updates += 1;
    }
  }
  const double k = static_cast<double>(stats.updates);
  stats.policy /= k;
  stats.critic /= k;
  stats.entropy /= k;
  stats.grad_norm /= k;
  return stats;
}

EvalPoint Trainer::evaluate_now() {
  const auto& norm = collector_.config().norm_input;
  EvalPoint point{state_.iteration, state_.total_env_steps,
                  evaluate(state_.params, factory_, options_.algo.inputs(), options_.eval_episodes,
                           derive_seed(derive_seed(options_.seed, kEvalStream), static_cast<std::uint64_t>(state_.iteration)),
                           norm ? &collector_.obs_normalizer() : nullptr, norm ? &collector_.state_normalizer() : nullptr)};
  state_.history.push_back(point);
  return point;
}

void Trainer::run(const std::function<void(const IterationStats&, const std::optional<EvalPoint>&)>& on_iteration) {
  while (state_.iteration < options_.iterations) {
    const auto stats = train_iteration();
    std::optional<EvalPoint> point;
    const bool last = state_.iteration == options_.iterations;
    if (options_.eval_every > 0 && (state_.iteration % options_.eval_every == 0 || last)) point = evaluate_now();
    if (on_iteration) on_iteration(stats, point);
  }
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::BinaryWriter w(os);
  w.magic(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.str(options_.metadata);
  w.i64(state_.iteration);
  w.u64(state_.total_env_steps);
  w.str(rng_state(state_.rng));
  ad::write_parameters(w, state_.params.named());
  state_.optimizer.write_state(w);
  collector_.write_state(w);
  w.u64(state_.history.size());
  for (const auto& p : state_.history) {
    w.i64(p.iteration);
    w.u64(p.env_steps);
    w.f64(p.result.mean_return);
    w.f64(p.result.win_rate);
    w.f64(p.result.cooperative_rate);
    w.i64(p.result.episodes);
  }
  w.check();
}

namespace {

std::string read_header(io::BinaryReader& r) {
  r.expect_magic(kCheckpointMagic);
  if (r.u32() != kCheckpointVersion) throw io::FormatError("unsupported checkpoint version");
  return r.str();
}

}  // namespace

void Trainer::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  io::BinaryReader r(is);
  read_header(r);
  state_.iteration = static_cast<int>(r.i64());
  state_.total_env_steps = r.u64();
  set_rng_state(state_.rng, r.str());
  ad::assign_parameters(state_.params.named(), ad::read_parameters(r));
  state_.optimizer.read_state(r);
  collector_.read_state(r);
  state_.history.clear();
  const auto n = r.u64();
  for (std::uint64_t i = 0; i < n; ++i) {
    EvalPoint p;
    p.iteration = static_cast<int>(r.i64());
    p.env_steps = r.u64();
    p.result.mean_return = r.f64();
    p.result.win_rate = r.f64();
    p.result.cooperative_rate = r.f64();
    p.result.episodes = static_cast<int>(r.i64());
    state_.history.push_back(p);
  }
}

std::string read_checkpoint_metadata(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  io::BinaryReader r(is);
  return read_header(r);
}

}  // namespace ippo::train
