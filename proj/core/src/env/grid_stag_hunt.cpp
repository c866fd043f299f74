#include "ippo/env/grid_stag_hunt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace ippo::env {

void GridStagHuntConfig::validate() const {
  if (size < 3) throw EnvError("grid_stag_hunt: size must be >= 3");
  if (n_hares < 0) throw EnvError("grid_stag_hunt: n_hares must be >= 0");
  if (GridStagHunt::kAgents + 1 + n_hares > size * size) throw EnvError("grid_stag_hunt: too many entities for grid");
  if (episode_limit < 1) throw EnvError("grid_stag_hunt: episode_limit must be >= 1");
  if (sight_radius < 1) throw EnvError("grid_stag_hunt: sight_radius must be >= 1");
  if (!std::isfinite(penalty) || !std::isfinite(stag_reward) || !std::isfinite(hare_reward)) {
    throw EnvError("grid_stag_hunt: rewards must be finite");
  }
}

namespace {
EnvSpec stag_spec(const GridStagHuntConfig& c, double gamma) {
  c.validate();
  EnvSpec spec;
  spec.n_agents = GridStagHunt::kAgents;
  spec.n_actions = GridStagHunt::kActions;
  spec.obs_dim = 2 + 3 * (GridStagHunt::kAgents - 1 + 1 + c.n_hares);
  spec.state_dim = 2 * (GridStagHunt::kAgents + 1 + c.n_hares);
  spec.episode_limit = c.episode_limit;
  spec.gamma = gamma;
  return spec;
}

constexpr int kDx[GridStagHunt::kActions] = {0, 0, -1, 1, 0};
constexpr int kDy[GridStagHunt::kActions] = {-1, 1, 0, 0, 0};
}  // namespace

GridStagHunt::GridStagHunt(GridStagHuntConfig config, double gamma)
    : Environment(stag_spec(config, gamma)), config_(config), hares_(static_cast<std::size_t>(config.n_hares)) {}

GridStagHunt::Cell GridStagHunt::wrap(int x, int y) const {
  const int n = config_.size;
  return {((x % n) + n) % n, ((y % n) + n) % n};
}

GridStagHunt::Cell GridStagHunt::offset(Cell from, Cell to) const {
  const int n = config_.size;
  auto axis = [n](int d) {
    d = ((d % n) + n) % n;
    return d > n / 2 ? d - n : d;
  };
  return {axis(to.x - from.x), axis(to.y - from.y)};
}

int GridStagHunt::distance(Cell a, Cell b) const {
  const auto d = offset(a, b);
  return std::abs(d.x) + std::abs(d.y);
}

bool GridStagHunt::occupied(Cell c) const {
  if (c == stag_) return true;
  if (std::find(hunters_.begin(), hunters_.end(), c) != hunters_.end()) return true;
  return std::find(hares_.begin(), hares_.end(), c) != hares_.end();
}

GridStagHunt::Cell GridStagHunt::random_free_cell(bool avoid_hunters) {
  std::vector<Cell> free;
  std::vector<Cell> fallback;
  for (int y = 0; y < config_.size; ++y) {
    for (int x = 0; x < config_.size; ++x) {
      const Cell c{x, y};
      if (occupied(c)) continue;
      fallback.push_back(c);
      const bool near = std::any_of(hunters_.begin(), hunters_.end(), [&](Cell h) { return distance(h, c) <= 1; });
      if (!avoid_hunters || !near) free.push_back(c);
    }
  }
  auto& pool = free.empty() ? fallback : free;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng_)];
}

void GridStagHunt::on_reset(std::uint64_t seed) {
  rng_.seed(seed);
  std::vector<Cell> cells;
  for (int y = 0; y < config_.size; ++y) {
    for (int x = 0; x < config_.size; ++x) cells.push_back({x, y});
  }
  std::shuffle(cells.begin(), cells.end(), rng_);
  std::size_t k = 0;
  for (auto& h : hunters_) h = cells[k++];
  stag_ = cells[k++];
  for (auto& h : hares_) h = cells[k++];
}

void GridStagHunt::place(const std::array<Cell, kAgents>& hunters, Cell stag, const std::vector<Cell>& hares) {
  if (hares.size() != hares_.size()) throw EnvError("grid_stag_hunt: wrong number of hares");
  hunters_ = hunters;
  stag_ = stag;
  hares_ = hares;
}

void GridStagHunt::on_step(std::span<const int> joint_action, Transition& out) {
  std::array<Cell, kAgents> next{};
  for (std::size_t a = 0; a < hunters_.size(); ++a) {
    const auto act = static_cast<std::size_t>(joint_action[a]);
    const Cell target = wrap(hunters_[a].x + kDx[act], hunters_[a].y + kDy[act]);
    next[a] = target == stag_ ? hunters_[a] : target;
  }
  hunters_ = next;

  double reward = 0.0;
  for (auto& hare : hares_) {
    if (std::find(hunters_.begin(), hunters_.end(), hare) == hunters_.end()) continue;
    reward += config_.hare_reward;
    hare = random_free_cell(false);
  }

  const auto adjacent = std::count_if(hunters_.begin(), hunters_.end(), [&](Cell h) { return distance(h, stag_) == 1; });
  if (adjacent == kAgents) {
    reward += config_.stag_reward;
    out.cooperative = true;
    stag_ = random_free_cell(true);
  } else if (adjacent > 0) {
    reward += config_.penalty;
  }
  out.reward = reward;
}

std::vector<std::vector<double>> GridStagHunt::observations() const {
  const double n = config_.size;
  const double r = config_.sight_radius;
  std::vector<std::vector<double>> obs;
  for (std::size_t a = 0; a < hunters_.size(); ++a) {
    const Cell self = hunters_[a];
    std::vector<double> o{self.x / n, self.y / n};
    auto see = [&](Cell c) {
      const auto d = offset(self, c);
      if (std::abs(d.x) + std::abs(d.y) <= config_.sight_radius) {
        o.insert(o.end(), {1.0, d.x / r, d.y / r});
      } else {
        o.insert(o.end(), {0.0, 0.0, 0.0});
      }
    };
    for (std::size_t b = 0; b < hunters_.size(); ++b) {
      if (b != a) see(hunters_[b]);
    }
    see(stag_);
    for (const auto& h : hares_) see(h);
    obs.push_back(std::move(o));
  }
  return obs;
}

std::vector<double> GridStagHunt::full_state() const {
  const double n = config_.size;
  std::vector<double> s;
  for (const auto& h : hunters_) s.insert(s.end(), {h.x / n, h.y / n});
  s.insert(s.end(), {stag_.x / n, stag_.y / n});
  for (const auto& h : hares_) s.insert(s.end(), {h.x / n, h.y / n});
  return s;
}

void GridStagHunt::write_dynamics(io::BinaryWriter& out) const {
  out.str(rng_state(rng_));
  auto cell = [&](Cell c) {
    out.i64(c.x);
    out.i64(c.y);
  };
  for (const auto& h : hunters_) cell(h);
  cell(stag_);
  out.u64(hares_.size());
  for (const auto& h : hares_) cell(h);
}

void GridStagHunt::read_dynamics(io::BinaryReader& in) {
  set_rng_state(rng_, in.str());
  auto cell = [&] {
    Cell c;
    c.x = static_cast<int>(in.i64());
    c.y = static_cast<int>(in.i64());
    return c;
  };
  for (auto& h : hunters_) h = cell();
  stag_ = cell();
  if (in.u64() != hares_.size()) throw io::FormatError("grid_stag_hunt: hare count mismatch");
  for (auto& h : hares_) h = cell();
}

}  // namespace ippo::env
