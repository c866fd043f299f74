#include "ippo/rollout/collector.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

namespace ippo::rollout {

SampledAction sample_action(std::span<const double> dist, Rng& rng) {
  if (dist.empty()) throw std::invalid_argument("sample_action: empty distribution");
  double total = 0.0;
  for (double p : dist) {
    if (!std::isfinite(p) || p < 0.0) throw std::invalid_argument("sample_action: degenerate distribution");
    total += p;
  }
  if (!(total > 0.0)) throw std::invalid_argument("sample_action: distribution has no mass");
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * total;
  double cumulative = 0.0;
  int chosen = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] == 0.0) continue;
    chosen = static_cast<int>(i);
    cumulative += dist[i];
    if (u < cumulative) break;
  }
  return {chosen, std::log(dist[static_cast<std::size_t>(chosen)])};
}

int greedy_action(std::span<const double> dist) {
  return static_cast<int>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

void RolloutConfig::validate() const {
  if (n_actors < 1) throw std::invalid_argument("n_actors must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon (steps num) must be >= 1");
  if (inputs.frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

Collector::Collector(const env::EnvFactory& factory, RolloutConfig config, std::uint64_t seed) : config_(config) {
  config_.validate();
  auto probe = factory();
  spec_ = probe->spec();
  obs_norm_ = nn::RunningNormalizer(static_cast<std::size_t>(spec_.obs_dim));
  state_norm_ = nn::RunningNormalizer(static_cast<std::size_t>(spec_.state_dim));
  for (int i = 0; i < config_.n_actors; ++i) {
    actors_.push_back(Actor{i == 0 ? std::move(probe) : factory(), Rng(derive_seed(seed, static_cast<std::uint64_t>(i))),
                            nn::AgentInputs(spec_, config_.inputs), true, {},
                            nn::RunningNormalizer(static_cast<std::size_t>(spec_.obs_dim)),
                            nn::RunningNormalizer(static_cast<std::size_t>(spec_.state_dim))});
  }
}

void Collector::observe(Actor& actor, const env::Transition& t) {
  if (!config_.norm_input) return;
  for (const auto& o : t.obs) actor.obs_seen.update(o);
  actor.state_seen.update(t.state);
}

void Collector::run_actor(std::size_t index, const nn::ParameterSet& snapshot, TrajectoryBatch& batch,
                          std::vector<EpisodeSummary>& finished) {
  Actor& actor = actors_[index];
  const int actor_id = static_cast<int>(index);
  const auto n_agents = static_cast<std::size_t>(spec_.n_agents);
  const auto n_actions = static_cast<std::size_t>(spec_.n_actions);
  std::vector<int> joint(n_agents);

  for (int t = 0; t < config_.horizon; ++t) {
    if (actor.needs_reset) {
      const auto first = actor.env->reset(actor.rng());
      actor.inputs.begin_episode(first);
      observe(actor, first);
      actor.running = {};
      actor.needs_reset = false;
    }
    const auto policy_rows = actor.inputs.policy_rows();
    const auto critic_rows = actor.inputs.critic_rows();
    const auto state = actor.env->full_state();

    ad::Tape tape;
    const auto logp = nn::policy_log_probs(
        tape, snapshot.actor, ad::Tensor::from({n_agents, batch.policy_width}, policy_rows));
    const auto value = nn::values(tape, snapshot.critic, ad::Tensor::from({n_agents, batch.critic_width}, critic_rows));

    std::vector<double> probs(n_actions);
    for (std::size_t a = 0; a < n_agents; ++a) {
      for (std::size_t k = 0; k < n_actions; ++k) probs[k] = std::exp(logp[a * n_actions + k]);
      joint[a] = sample_action(probs, actor.rng).action;
      const auto i = batch.sample_index(actor_id, t, static_cast<int>(a));
      batch.actions[i] = joint[a];
      batch.old_logp[i] = logp[a * n_actions + static_cast<std::size_t>(joint[a])];
      batch.old_values[i] = value[a];
      std::copy_n(policy_rows.begin() + static_cast<std::ptrdiff_t>(a * batch.policy_width), batch.policy_width,
                  batch.policy_inputs.begin() + static_cast<std::ptrdiff_t>(i * batch.policy_width));
      std::copy_n(critic_rows.begin() + static_cast<std::ptrdiff_t>(a * batch.critic_width), batch.critic_width,
                  batch.critic_inputs.begin() + static_cast<std::ptrdiff_t>(i * batch.critic_width));
    }
    const auto s = batch.step_index(actor_id, t);
    std::copy(state.begin(), state.end(), batch.states.begin() + static_cast<std::ptrdiff_t>(s * batch.state_dim));

    const auto next = actor.env->step(joint);
    batch.rewards[s] = next.reward;
    batch.terminals[s] = next.terminal ? 1 : 0;
    actor.running.ret += next.reward;
    actor.running.length += 1;
    if (next.cooperative) actor.running.cooperative_steps += 1;
    if (next.terminal) {
      actor.running.won = next.won;
      finished.push_back(actor.running);
      actor.needs_reset = true;
    } else {
      actor.inputs.push(next);
      observe(actor, next);
    }
  }

  for (std::size_t a = 0; a < n_agents; ++a) batch.bootstrap_values[index * n_agents + a] = 0.0;
  if (!actor.needs_reset) {
    ad::Tape tape;
    const auto value = nn::values(tape, snapshot.critic,
                                  ad::Tensor::from({n_agents, batch.critic_width}, actor.inputs.critic_rows()));
    for (std::size_t a = 0; a < n_agents; ++a) batch.bootstrap_values[index * n_agents + a] = value[a];
  }
}

TrajectoryBatch Collector::collect(const nn::ParameterSet& params) {
  const auto snapshot = params.frozen();
  TrajectoryBatch batch;
  const auto& probe = actors_.front().inputs;
  batch.allocate(config_.n_actors, spec_.n_agents, config_.horizon, probe.policy_width(), probe.critic_width(),
                 static_cast<std::size_t>(spec_.state_dim));

  for (auto& actor : actors_) {
    actor.inputs.set_normalizers(config_.norm_input ? &obs_norm_ : nullptr, config_.norm_input ? &state_norm_ : nullptr);
  }

  std::vector<std::vector<EpisodeSummary>> finished(actors_.size());
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config_.workers), actors_.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < actors_.size(); ++i) run_actor(i, snapshot, batch, finished[i]);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < actors_.size(); i += workers) run_actor(i, snapshot, batch, finished[i]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (auto& f : finished) batch.episodes.insert(batch.episodes.end(), f.begin(), f.end());
  if (config_.norm_input) {
    for (auto& actor : actors_) {
      obs_norm_.merge(actor.obs_seen);
      state_norm_.merge(actor.state_seen);
      actor.obs_seen = nn::RunningNormalizer(obs_norm_.width());
      actor.state_seen = nn::RunningNormalizer(state_norm_.width());
    }
  }
  return batch;
}

void Collector::write_state(io::BinaryWriter& out) const {
  out.u64(actors_.size());
  for (const auto& actor : actors_) {
    actor.env->write_state(out);
    out.str(rng_state(actor.rng));
    actor.inputs.write_state(out);
    out.u8(actor.needs_reset ? 1 : 0);
    out.f64(actor.running.ret);
    out.i64(actor.running.length);
    out.i64(actor.running.cooperative_steps);
  }
  obs_norm_.write_state(out);
  state_norm_.write_state(out);
}

void Collector::read_state(io::BinaryReader& in) {
  if (in.u64() != actors_.size()) throw io::FormatError("collector state has a different actor count");
  for (auto& actor : actors_) {
    actor.env->read_state(in);
    set_rng_state(actor.rng, in.str());
    actor.inputs.read_state(in);
    actor.needs_reset = in.u8() != 0;
    actor.running = {};
    actor.running.ret = in.f64();
    actor.running.length = static_cast<int>(in.i64());
    actor.running.cooperative_steps = static_cast<int>(in.i64());
  }
  obs_norm_.read_state(in);
  state_norm_.read_state(in);
}

}  // namespace ippo::rollout
