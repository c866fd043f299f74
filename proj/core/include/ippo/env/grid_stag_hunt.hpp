#pragma once

#include <array>
#include <vector>

#include "ippo/env/environment.hpp"
#include "ippo/util/random.hpp"

namespace ippo::env {

struct GridStagHuntConfig {
  int size = 5;
  int n_hares = 2;
  double penalty = -2.0;
  double stag_reward = 4.0;
  double hare_reward = 1.0;
  int episode_limit = 50;
  /// Manhattan sight radius on the torus.
  int sight_radius = 2;

  void validate() const;
};

/// Two hunters on a torus grid with one stag and a few hares.
///
/// Actions: 0 up, 1 down, 2 left, 3 right, 4 stay. Prey do not move. Moving onto
/// a hare catches it (+hare_reward) and the hare respawns on a free cell. The
/// stag's cell is blocked; after moving, if both hunters are at distance 1 from
/// the stag the team earns stag_reward and the stag respawns, while a single
/// adjacent hunter costs `penalty` that step.
///
/// Observation per hunter: own (x, y) / size, then for the other hunter, the
/// stag and each hare: (visible, dx / sight, dy / sight), zeroed when the
/// entity is beyond the sight radius. State: every entity's (x, y) / size.
class GridStagHunt final : public Environment {
 public:
  static constexpr int kAgents = 2;
  static constexpr int kActions = 5;

  explicit GridStagHunt(GridStagHuntConfig config = {}, double gamma = 0.99);

  std::string name() const override { return "grid_stag_hunt"; }
  std::vector<double> full_state() const override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<GridStagHunt>(*this); }

  struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
  };

  const GridStagHuntConfig& config() const { return config_; }
  const std::array<Cell, kAgents>& hunters() const { return hunters_; }
  Cell stag() const { return stag_; }
  const std::vector<Cell>& hares() const { return hares_; }
  /// Places entities explicitly (tests and scripted scenarios).
  void place(const std::array<Cell, kAgents>& hunters, Cell stag, const std::vector<Cell>& hares);

  /// Shortest wrapped offset from `from` to `to` along each axis.
  Cell offset(Cell from, Cell to) const;
  int distance(Cell a, Cell b) const;

 protected:
  void on_reset(std::uint64_t seed) override;
  void on_step(std::span<const int> joint_action, Transition& out) override;
  std::vector<std::vector<double>> observations() const override;
  void write_dynamics(io::BinaryWriter& out) const override;
  void read_dynamics(io::BinaryReader& in) override;

 private:
  Cell wrap(int x, int y) const;
  bool occupied(Cell c) const;
  Cell random_free_cell(bool avoid_hunters);

  GridStagHuntConfig config_;
  Rng rng_;
  std::array<Cell, kAgents> hunters_{};
  Cell stag_{};
  std::vector<Cell> hares_;
};

}  // namespace ippo::env
