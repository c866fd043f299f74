#include "ippo/env/skirmish.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace ippo::env {

void SkirmishConfig::validate() const {
  if (size < 4) throw EnvError("skirmish: size must be >= 4");
  if (n_allies < 1 || n_enemies < 1) throw EnvError("skirmish: both teams need at least one unit");
  if (n_allies > 2 * size || n_enemies > 2 * size) throw EnvError("skirmish: too many units for spawn columns");
  if (health < 1) throw EnvError("skirmish: health must be >= 1");
  if (attack_range < 1) throw EnvError("skirmish: attack_range must be >= 1");
  if (cooldown < 0) throw EnvError("skirmish: cooldown must be >= 0");
  if (sight_radius < 1) throw EnvError("skirmish: sight_radius must be >= 1");
  if (episode_limit < 1) throw EnvError("skirmish: episode_limit must be >= 1");
  if (!(reward_max > 0.0)) throw EnvError("skirmish: reward_max must be positive");
}

namespace {
EnvSpec skirmish_spec(const SkirmishConfig& c, double gamma) {
  c.validate();
  EnvSpec spec;
  spec.n_agents = c.n_allies;
  spec.n_actions = Skirmish::kActions;
  spec.obs_dim = 4 + 4 * (c.n_allies - 1 + c.n_enemies);
  spec.state_dim = 4 * (c.n_allies + c.n_enemies);
  spec.episode_limit = c.episode_limit;
  spec.gamma = gamma;
  return spec;
}

constexpr int kDx[4] = {0, 0, -1, 1};
constexpr int kDy[4] = {-1, 1, 0, 0};

int manhattan(const Skirmish::Unit& a, const Skirmish::Unit& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
}  // namespace

Skirmish::Skirmish(SkirmishConfig config, double gamma)
    : Environment(skirmish_spec(config, gamma)),
      config_(config),
      allies_(static_cast<std::size_t>(config.n_allies)),
      enemies_(static_cast<std::size_t>(config.n_enemies)) {}

double Skirmish::reward_scale() const {
  const double flawless = config_.n_enemies * (config_.health * config_.damage_reward + config_.kill_reward) +
                          config_.win_reward;
  return flawless > 0.0 ? config_.reward_max / flawless : 1.0;
}

void Skirmish::on_reset(std::uint64_t seed) {
  rng_.seed(seed);
  auto spawn = [&](std::vector<Unit>& team, int first_column) {
    std::vector<std::pair<int, int>> cells;
    for (int x = first_column; x < first_column + 2; ++x) {
      for (int y = 0; y < config_.size; ++y) cells.emplace_back(x, y);
    }
    std::shuffle(cells.begin(), cells.end(), rng_);
    for (std::size_t i = 0; i < team.size(); ++i) {
      team[i] = Unit{cells[i].first, cells[i].second, config_.health, 0};
    }
  };
  spawn(allies_, 0);
  spawn(enemies_, config_.size - 2);
}

void Skirmish::place(std::vector<Unit> allies, std::vector<Unit> enemies) {
  if (allies.size() != allies_.size() || enemies.size() != enemies_.size()) {
    throw EnvError("skirmish: wrong team sizes in place()");
  }
  allies_ = std::move(allies);
  enemies_ = std::move(enemies);
}

bool Skirmish::blocked(int x, int y) const {
  if (x < 0 || y < 0 || x >= config_.size || y >= config_.size) return true;
  auto at = [x, y](const Unit& u) { return u.alive() && u.x == x && u.y == y; };
  return std::any_of(allies_.begin(), allies_.end(), at) || std::any_of(enemies_.begin(), enemies_.end(), at);
}

void Skirmish::move(Unit& unit, int dx, int dy) const {
  if (!blocked(unit.x + dx, unit.y + dy)) {
    unit.x += dx;
    unit.y += dy;
  }
}

int Skirmish::nearest(const Unit& from, const std::vector<Unit>& targets, int range) {
  int best = -1;
  int best_d = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i].alive()) continue;
    const int d = manhattan(from, targets[i]);
    if (d <= range && d < best_d) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  return best;
}

void Skirmish::on_step(std::span<const int> joint_action, Transition& out) {
  double reward = 0.0;
  auto strike = [&](Unit& attacker, Unit& target, bool scored) {
    target.health -= 1;
    attacker.cooldown = config_.cooldown + 1;
    if (scored) {
      reward += config_.damage_reward;
      if (!target.alive()) reward += config_.kill_reward;
    }
  };

  for (std::size_t a = 0; a < allies_.size(); ++a) {
    Unit& unit = allies_[a];
    if (!unit.alive()) continue;
    const int act = joint_action[a];
    if (act < 4) {
      move(unit, kDx[act], kDy[act]);
    } else if (act == kAttack && unit.cooldown == 0) {
      const int target = nearest(unit, enemies_, config_.attack_range);
      if (target >= 0) strike(unit, enemies_[static_cast<std::size_t>(target)], true);
    }
  }

  const bool enemies_dead = std::none_of(enemies_.begin(), enemies_.end(), [](const Unit& u) { return u.alive(); });
  if (enemies_dead) {
    reward += config_.win_reward;
    out.terminal = true;
    out.won = true;
    out.cooperative = true;
  } else {
    const int everywhere = 2 * config_.size;
    for (auto& enemy : enemies_) {
      if (!enemy.alive()) continue;
      const int in_range = nearest(enemy, allies_, config_.attack_range);
      if (in_range >= 0) {
        if (enemy.cooldown == 0) strike(enemy, allies_[static_cast<std::size_t>(in_range)], false);
        continue;
      }
      const int chase = nearest(enemy, allies_, everywhere);
      if (chase < 0) break;
      const Unit& goal = allies_[static_cast<std::size_t>(chase)];
      const int dx = goal.x - enemy.x;
      const int dy = goal.y - enemy.y;
      const int sx = (dx > 0) - (dx < 0);
      const int sy = (dy > 0) - (dy < 0);
      const int before_x = enemy.x, before_y = enemy.y;
      if (std::abs(dx) >= std::abs(dy)) {
        move(enemy, sx, 0);
        if (enemy.x == before_x && sy != 0) move(enemy, 0, sy);
      } else {
        move(enemy, 0, sy);
        if (enemy.y == before_y && sx != 0) move(enemy, sx, 0);
      }
    }
    if (std::none_of(allies_.begin(), allies_.end(), [](const Unit& u) { return u.alive(); })) {
      out.terminal = true;
      out.won = false;
    }
  }

  for (auto* team : {&allies_, &enemies_}) {
    for (auto& u : *team) {
      if (u.cooldown > 0) --u.cooldown;
    }
  }
  out.reward = reward * reward_scale();
}

std::vector<std::vector<double>> Skirmish::observations() const {
  const double span = config_.size - 1;
  const double sight = config_.sight_radius;
  const double hp = config_.health;
  const double cd = std::max(1, config_.cooldown);
  std::vector<std::vector<double>> obs;
  for (std::size_t a = 0; a < allies_.size(); ++a) {
    const Unit& self = allies_[a];
    std::vector<double> o(static_cast<std::size_t>(spec().obs_dim), 0.0);
    if (self.alive()) {
      o[0] = self.x / span;
      o[1] = self.y / span;
      o[2] = self.health / hp;
      o[3] = self.cooldown / cd;
      std::size_t k = 4;
      auto see = [&](const Unit& u) {
        const int dx = u.x - self.x;
        const int dy = u.y - self.y;
        if (u.alive() && std::max(std::abs(dx), std::abs(dy)) <= config_.sight_radius) {
          o[k] = 1.0;
          o[k + 1] = dx / sight;
          o[k + 2] = dy / sight;
          o[k + 3] = u.health / hp;
        }
        k += 4;
      };
      for (std::size_t b = 0; b < allies_.size(); ++b) {
        if (b != a) see(allies_[b]);
      }
      for (const auto& e : enemies_) see(e);
    }
    obs.push_back(std::move(o));
  }
  return obs;
}

std::vector<double> Skirmish::full_state() const {
  const double span = config_.size - 1;
  const double hp = config_.health;
  const double cd = std::max(1, config_.cooldown);
  std::vector<double> s;
  for (const auto* team : {&allies_, &enemies_}) {
    for (const auto& u : *team) {
      if (u.alive()) {
        s.insert(s.end(), {u.x / span, u.y / span, u.health / hp, u.cooldown / cd});
      } else {
        s.insert(s.end(), {0.0, 0.0, 0.0, 0.0});
      }
    }
  }
  return s;
}

void Skirmish::write_dynamics(io::BinaryWriter& out) const {
  out.str(rng_state(rng_));
  for (const auto* team : {&allies_, &enemies_}) {
    out.u64(team->size());
    for (const auto& u : *team) {
      out.i64(u.x);
      out.i64(u.y);
      out.i64(u.health);
      out.i64(u.cooldown);
    }
  }
}

void Skirmish::read_dynamics(io::BinaryReader& in) {
  set_rng_state(rng_, in.str());
  for (auto* team : {&allies_, &enemies_}) {
    if (in.u64() != team->size()) throw io::FormatError("skirmish: team size mismatch");
    for (auto& u : *team) {
      u.x = static_cast<int>(in.i64());
      u.y = static_cast<int>(in.i64());
      u.health = static_cast<int>(in.i64());
      u.cooldown = static_cast<int>(in.i64());
    }
  }
}

}  // namespace ippo::env
