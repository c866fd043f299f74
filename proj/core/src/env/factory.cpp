#include "ippo/env/factory.hpp"

namespace ippo::env {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::matrix_stag_hunt: return "matrix_stag_hunt";
    case EnvKind::matrix_game: return "matrix_game";
    case EnvKind::grid_stag_hunt: return "grid_stag_hunt";
    case EnvKind::skirmish: return "skirmish";
  }
  return "unknown";
}

EnvKind parse_env_kind(const std::string& name) {
  for (auto k : {EnvKind::matrix_stag_hunt, EnvKind::matrix_game, EnvKind::grid_stag_hunt, EnvKind::skirmish}) {
    if (to_string(k) == name) return k;
  }
  throw EnvError("unknown environment '" + name + "'");
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  switch (config.kind) {
    case EnvKind::matrix_stag_hunt:
      return std::make_unique<MatrixGame>(stag_hunt_matrix(config.matrix_penalty, config.matrix_horizon), config.gamma);
    case EnvKind::matrix_game:
      return std::make_unique<MatrixGame>(config.matrix, config.gamma);
    case EnvKind::grid_stag_hunt:
      return std::make_unique<GridStagHunt>(config.grid, config.gamma);
    case EnvKind::skirmish:
      return std::make_unique<Skirmish>(config.skirmish, config.gamma);
  }
  throw EnvError("unknown environment kind");
}

EnvFactory make_factory(const EnvConfig& config) {
  return [config] { return make_environment(config); };
}

}  // namespace ippo::env
