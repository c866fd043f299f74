#pragma once

#include <functional>
#include <memory>
#include <string>

#include "ippo/env/environment.hpp"
#include "ippo/env/grid_stag_hunt.hpp"
#include "ippo/env/matrix_game.hpp"
#include "ippo/env/skirmish.hpp"

namespace ippo::env {

enum class EnvKind { matrix_stag_hunt, matrix_game, grid_stag_hunt, skirmish };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);

/// Environment choice plus the parameters of every environment family; only
/// the block matching `kind` is used.
struct EnvConfig {
  EnvKind kind = EnvKind::matrix_stag_hunt;
  double gamma = 0.99;
  /// matrix_stag_hunt
  double matrix_penalty = -2.0;
  int matrix_horizon = 10;
  /// matrix_game (explicit payoff)
  MatrixGameSpec matrix;
  GridStagHuntConfig grid;
  SkirmishConfig skirmish;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

using EnvFactory = std::function<std::unique_ptr<Environment>()>;
EnvFactory make_factory(const EnvConfig& config);

}  // namespace ippo::env
