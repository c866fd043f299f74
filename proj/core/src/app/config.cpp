#include "ippo/app/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ippo/train/ablation.hpp"

namespace ippo::app {
namespace {

using nlohmann::json;

/// Reads keys out of one JSON object and rejects whatever was not read.
class Block {
 public:
  Block(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    try {
      if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
        if (!it->is_number_integer()) throw ConfigError(name(key) + ": expected an integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ConfigError(name(key) + ": expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ConfigError(name(key) + ": expected true or false");
      }
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(name(key) + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }
  std::string name(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key) + ": unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

void parse_env(const json& node, RunConfig& cfg) {
  if (node.is_string()) {
    cfg.env.kind = env::parse_env_kind(node.get<std::string>());
    return;
  }
  Block b(node, "env");
  std::string name = env::to_string(cfg.env.kind);
  b.get("name", name);
  require(b.has("name"), "env.name", "missing environment name");
  try {
    cfg.env.kind = env::parse_env_kind(name);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("env.name: ") + e.what());
  }
  switch (cfg.env.kind) {
    case env::EnvKind::matrix_stag_hunt:
      b.get("penalty", cfg.env.matrix_penalty);
      b.get("horizon", cfg.env.matrix_horizon);
      require(cfg.env.matrix_horizon >= 1, "env.horizon", "must be >= 1");
      break;
    case env::EnvKind::matrix_game:
      b.get("payoff", cfg.env.matrix.payoff);
      b.get("horizon", cfg.env.matrix.horizon);
      break;
    case env::EnvKind::grid_stag_hunt: {
      auto& g = cfg.env.grid;
      b.get("size", g.size);
      b.get("n_hares", g.n_hares);
      b.get("penalty", g.penalty);
      b.get("stag_reward", g.stag_reward);
      b.get("hare_reward", g.hare_reward);
      b.get("episode_limit", g.episode_limit);
      b.get("sight_radius", g.sight_radius);
      break;
    }
    case env::EnvKind::skirmish: {
      auto& s = cfg.env.skirmish;
      b.get("size", s.size);
      b.get("n_allies", s.n_allies);
      b.get("n_enemies", s.n_enemies);
      b.get("health", s.health);
      b.get("attack_range", s.attack_range);
      b.get("cooldown", s.cooldown);
      b.get("sight_radius", s.sight_radius);
      b.get("episode_limit", s.episode_limit);
      b.get("damage_reward", s.damage_reward);
      b.get("kill_reward", s.kill_reward);
      b.get("win_reward", s.win_reward);
      b.get("reward_max", s.reward_max);
      break;
    }
  }
  b.finish();
}

void parse_algo(const json& node, RunConfig& cfg) {
  auto& a = cfg.algo;
  Block b(node, "algo");
  b.get("critic_coef", a.lambda_critic);
  b.get("entropy_coef", a.lambda_entropy);
  b.get("frames", a.frames);
  b.get("lr", a.lr);
  b.get("mini_epochs", a.mini_epochs);
  b.get("mini_batch", a.mini_batch);
  b.get("norm_input", a.norm_input);
  b.get("steps_num", a.horizon);
  b.get("eps_clip", a.eps_clip);
  b.get("gamma", a.gamma);
  b.get("lam", a.lam);
  b.get("grad_norm", a.grad_norm);
  b.get("n_actors", a.n_actors);
  b.get("policy_clip", a.policy_clip_enabled);
  b.get("value_clip", a.value_clip_enabled);
  b.get("agent_id", a.agent_id);
  b.get("adam_eps", a.adam_eps);

  std::string type = nn::to_string(a.network.kind);
  b.get("type", type);
  try {
    a.network.kind = nn::parse_encoder_kind(type);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("algo.type: ") + e.what());
  }
  if (a.network.kind == nn::EncoderKind::conv1d && !b.has("net_arch")) a.network.channels = {64, 128, 256};
  b.get("net_arch", a.network.channels);
  std::vector<int> strides(a.network.conv_strides.begin(), a.network.conv_strides.end());
  b.get("conv_strides", strides);
  require(strides.size() == 3, "algo.conv_strides", "needs exactly three strides");
  std::copy(strides.begin(), strides.end(), a.network.conv_strides.begin());

  std::string pessimism = loss::to_string(a.value_clip_pessimism);
  b.get("value_clip_pessimism", pessimism);
  std::string critic = nn::to_string(a.critic_mode);
  b.get("critic_mode", critic);
  try {
    a.value_clip_pessimism = loss::parse_value_clip_mode(pessimism);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("algo.value_clip_pessimism: ") + e.what());
  }
  try {
    a.critic_mode = nn::parse_critic_mode(critic);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("algo.critic_mode: ") + e.what());
  }
  b.finish();

  require(std::isfinite(a.lr) && a.lr > 0.0, "algo.lr", "must be > 0");
  require(a.eps_clip > 0.0, "algo.eps_clip", "must be > 0");
  require(a.mini_epochs >= 1, "algo.mini_epochs", "must be >= 1");
  require(a.mini_batch >= 1, "algo.mini_batch", "must be >= 1");
  require(a.frames >= 1, "algo.frames", "must be >= 1");
  require(a.horizon >= 1, "algo.steps_num", "must be >= 1");
  require(a.n_actors >= 1, "algo.n_actors", "must be >= 1");
  require(a.gamma >= 0.0 && a.gamma < 1.0, "algo.gamma", "must lie in [0, 1)");
  require(a.lam >= 0.0 && a.lam <= 1.0, "algo.lam", "must lie in [0, 1]");
  require(a.grad_norm > 0.0, "algo.grad_norm", "must be > 0");
  require(a.lambda_critic >= 0.0, "algo.critic_coef", "must be >= 0");
  require(a.lambda_entropy >= 0.0, "algo.entropy_coef", "must be >= 0");
  require(a.adam_eps > 0.0, "algo.adam_eps", "must be > 0");
  try {
    a.encoder().validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("algo.net_arch: ") + e.what());
  }
}

void parse_run(const json& node, RunConfig& cfg) {
  auto& r = cfg.run;
  Block b(node, "run");
  b.get("seeds", r.seeds);
  b.get("iterations", r.iterations);
  b.get("eval_every", r.eval_every);
  b.get("eval_episodes", r.eval_episodes);
  std::string out = r.out_dir.string();
  b.get("out_dir", out);
  r.out_dir = out;
  b.get("variant", r.variant);
  b.get("variants", r.variants);
  b.get("lr_scale", r.lr_scale);
  b.get("workers", r.workers);
  b.get("jobs", r.jobs);
  b.finish();

  require(!r.seeds.empty(), "run.seeds", "needs at least one seed");
  require(r.iterations >= 1, "run.iterations", "must be >= 1");
  require(r.eval_every >= 1, "run.eval_every", "must be >= 1");
  require(r.eval_episodes >= 1, "run.eval_episodes", "must be >= 1");
  require(r.lr_scale > 0.0, "run.lr_scale", "must be > 0");
  require(r.workers >= 1, "run.workers", "must be >= 1");
  require(r.jobs >= 1, "run.jobs", "must be >= 1");
  require(!r.out_dir.empty(), "run.out_dir", "must not be empty");
  auto check_variant = [](const std::string& key, const std::string& v) {
    try {
      train::parse_variant(v);
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what());
    }
  };
  check_variant("run.variant", r.variant);
  for (const auto& v : r.variants) check_variant("run.variants", v);
}

}  // namespace

RunConfig parse_config_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected an object at the top level");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    if (key != "env" && key != "algo" && key != "run") throw ConfigError(key + ": unknown key");
  }
  if (!doc.contains("env")) throw ConfigError("env: missing environment block");
  parse_env(doc.at("env"), cfg);
  if (doc.contains("algo")) parse_algo(doc.at("algo"), cfg);
  if (doc.contains("run")) parse_run(doc.at("run"), cfg);
  cfg.env.gamma = cfg.algo.gamma;
  try {
    env::make_environment(cfg.env);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config_json(doc);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const RunConfig& c) {
  json env_block = {{"name", env::to_string(c.env.kind)}};
  switch (c.env.kind) {
    case env::EnvKind::matrix_stag_hunt:
      env_block["penalty"] = c.env.matrix_penalty;
      env_block["horizon"] = c.env.matrix_horizon;
      break;
    case env::EnvKind::matrix_game:
      env_block["payoff"] = c.env.matrix.payoff;
      env_block["horizon"] = c.env.matrix.horizon;
      break;
    case env::EnvKind::grid_stag_hunt: {
      const auto& g = c.env.grid;
      env_block.update({{"size", g.size},
                        {"n_hares", g.n_hares},
                        {"penalty", g.penalty},
                        {"stag_reward", g.stag_reward},
                        {"hare_reward", g.hare_reward},
                        {"episode_limit", g.episode_limit},
                        {"sight_radius", g.sight_radius}});
      break;
    }
    case env::EnvKind::skirmish: {
      const auto& s = c.env.skirmish;
      env_block.update({{"size", s.size},
                        {"n_allies", s.n_allies},
                        {"n_enemies", s.n_enemies},
                        {"health", s.health},
                        {"attack_range", s.attack_range},
                        {"cooldown", s.cooldown},
                        {"sight_radius", s.sight_radius},
                        {"episode_limit", s.episode_limit},
                        {"damage_reward", s.damage_reward},
                        {"kill_reward", s.kill_reward},
                        {"win_reward", s.win_reward},
                        {"reward_max", s.reward_max}});
      break;
    }
  }
  const auto& a = c.algo;
  json algo = {{"critic_coef", a.lambda_critic},
               {"entropy_coef", a.lambda_entropy},
               {"frames", a.frames},
               {"lr", a.lr},
               {"mini_epochs", a.mini_epochs},
               {"mini_batch", a.mini_batch},
               {"norm_input", a.norm_input},
               {"steps_num", a.horizon},
               {"type", nn::to_string(a.network.kind)},
               {"net_arch", a.network.channels},
               {"conv_strides", std::vector<int>(a.network.conv_strides.begin(), a.network.conv_strides.end())},
               {"eps_clip", a.eps_clip},
               {"gamma", a.gamma},
               {"lam", a.lam},
               {"grad_norm", a.grad_norm},
               {"n_actors", a.n_actors},
               {"policy_clip", a.policy_clip_enabled},
               {"value_clip", a.value_clip_enabled},
               {"value_clip_pessimism", loss::to_string(a.value_clip_pessimism)},
               {"critic_mode", nn::to_string(a.critic_mode)},
               {"agent_id", a.agent_id},
               {"adam_eps", a.adam_eps}};
  const auto& r = c.run;
  json run = {{"seeds", r.seeds},           {"iterations", r.iterations}, {"eval_every", r.eval_every},
              {"eval_episodes", r.eval_episodes}, {"out_dir", r.out_dir.string()}, {"variant", r.variant},
              {"variants", r.variants},     {"lr_scale", r.lr_scale},     {"workers", r.workers},
              {"jobs", r.jobs}};
  return {{"env", env_block}, {"algo", algo}, {"run", run}};
}

}  // namespace ippo::app
