#pragma once

#include <vector>

#include "ippo/env/environment.hpp"
#include "ippo/util/random.hpp"

namespace ippo::env {

struct SkirmishConfig {
  int size = 8;
  int n_allies = 3;
  int n_enemies = 3;
  int health = 3;
  /// Manhattan attack range.
  int attack_range = 1;
  /// Steps a unit must wait after attacking.
  int cooldown = 1;
  /// Chebyshev sight radius.
  int sight_radius = 4;
  int episode_limit = 40;
  double damage_reward = 1.0;
  double kill_reward = 2.0;
  double win_reward = 10.0;
  /// Rewards are rescaled so that a flawless win sums to this value.
  double reward_max = 20.0;

  void validate() const;
};

/// Small-unit combat gridworld with a win condition.
///
/// Allies are the learning agents; actions: 0 up, 1 down, 2 left, 3 right,
/// 4 attack the nearest living enemy in range, 5 no-op. Enemies follow a fixed
/// script: attack the nearest ally in range when ready, otherwise step towards
/// the nearest ally. Allies act first each step, then enemies. The episode is
/// won when every enemy is eliminated and lost when all allies die or the step
/// limit is reached. Dead allies' actions are ignored.
///
/// Observation per ally: own (x, y, health, cooldown), then for each other
/// ally and each enemy (visible, dx / sight, dy / sight, health), zero when
/// dead or out of sight. State: (x, y, health, cooldown) for every unit.
class Skirmish final : public Environment {
 public:
  static constexpr int kActions = 6;
  static constexpr int kAttack = 4;
  static constexpr int kNoop = 5;

  struct Unit {
    int x = 0;
    int y = 0;
    int health = 0;
    int cooldown = 0;
    bool alive() const { return health > 0; }
  };

  explicit Skirmish(SkirmishConfig config = {}, double gamma = 0.99);

  std::string name() const override { return "skirmish"; }
  std::vector<double> full_state() const override;
  bool has_win_condition() const override { return true; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Skirmish>(*this); }

  const SkirmishConfig& config() const { return config_; }
  const std::vector<Unit>& allies() const { return allies_; }
  const std::vector<Unit>& enemies() const { return enemies_; }
  /// Overrides unit placement and health (tests and scripted scenarios).
  void place(std::vector<Unit> allies, std::vector<Unit> enemies);

 protected:
  void on_reset(std::uint64_t seed) override;
  void on_step(std::span<const int> joint_action, Transition& out) override;
  std::vector<std::vector<double>> observations() const override;
  void write_dynamics(io::BinaryWriter& out) const override;
  void read_dynamics(io::BinaryReader& in) override;

 private:
  bool blocked(int x, int y) const;
  void move(Unit& unit, int dx, int dy) const;
  /// Index of the nearest living unit of `targets` within `range` of `from`, or -1.
  static int nearest(const Unit& from, const std::vector<Unit>& targets, int range);
  double reward_scale() const;

  SkirmishConfig config_;
  Rng rng_;
  std::vector<Unit> allies_;
  std::vector<Unit> enemies_;
};

}  // namespace ippo::env
