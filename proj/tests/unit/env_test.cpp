#include <gtest/gtest.h>

#include <sstream>

#include "ippo/env/factory.hpp"
#include "ippo/env/grid_stag_hunt.hpp"
#include "ippo/env/matrix_game.hpp"
#include "ippo/env/skirmish.hpp"

namespace ippo::env {
namespace {

using Cell = GridStagHunt::Cell;
constexpr int kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4;

Transition act(Environment& env, std::vector<int> joint) { return env.step(joint); }

TEST(MatrixGame, StagHuntPayoffs) {
  MatrixGame game(stag_hunt_matrix(-2.0, 10));
  game.reset(0);
  const auto both_stag = act(game, {0, 0});
  EXPECT_EQ(both_stag.reward, 4.0);
  EXPECT_TRUE(both_stag.cooperative);
  EXPECT_EQ(act(game, {0, 1}).reward, -2.0);
  EXPECT_EQ(act(game, {1, 0}).reward, 1.0);
  const auto both_hare = act(game, {1, 1});
  EXPECT_EQ(both_hare.reward, 1.0);
  EXPECT_FALSE(both_hare.cooperative);
  EXPECT_EQ(game.best_payoff(), 4.0);
  EXPECT_EQ(game.spec().n_agents, 2);
  EXPECT_EQ(game.spec().n_actions, 2);
}

TEST(MatrixGame, HorizonEndsEpisodeAndStepAfterTerminalFails) {
  MatrixGame game(stag_hunt_matrix(0.0, 3));
  game.reset(0);
  EXPECT_FALSE(act(game, {0, 0}).terminal);
  EXPECT_FALSE(act(game, {0, 0}).terminal);
  const auto last = act(game, {0, 0});
  EXPECT_TRUE(last.terminal);
  EXPECT_FALSE(last.won.has_value());
  EXPECT_THROW(act(game, {0, 0}), EnvError);
}

TEST(MatrixGame, RejectsMalformedJointActions) {
  MatrixGame game(stag_hunt_matrix(0.0));
  EXPECT_THROW(act(game, {0, 0}), EnvError);  // before reset
  game.reset(1);
  EXPECT_THROW(act(game, {0}), EnvError);
  EXPECT_THROW(act(game, {0, 2}), EnvError);
  EXPECT_THROW(act(game, {-1, 0}), EnvError);
  EXPECT_THROW(MatrixGame(MatrixGameSpec{{{1.0, 2.0}}, 5}), EnvError);
}

TEST(GridStagHunt, JointCaptureEarnsStagAndRespawns) {
  GridStagHunt env;
  env.reset(3);
  env.place({Cell{1, 2}, Cell{3, 2}}, Cell{2, 2}, {Cell{0, 0}, Cell{4, 4}});
  const auto t = act(env, {kStay, kStay});
  EXPECT_EQ(t.reward, 4.0);
  EXPECT_TRUE(t.cooperative);
  EXPECT_GT(env.distance(env.stag(), env.hunters()[0]), 0);
  EXPECT_NE(env.stag(), env.hunters()[1]);
}

TEST(GridStagHunt, LoneHunterNextToStagIsPenalized) {
  GridStagHunt env;
  env.reset(3);
  env.place({Cell{1, 2}, Cell{0, 4}}, Cell{2, 2}, {Cell{4, 0}, Cell{4, 1}});
  const auto t = act(env, {kStay, kStay});
  EXPECT_EQ(t.reward, -2.0);
  EXPECT_FALSE(t.cooperative);
}

TEST(GridStagHunt, HareCatchAndBlockedStagCell) {
  GridStagHunt env;
  env.reset(4);
  env.place({Cell{0, 0}, Cell{4, 4}}, Cell{2, 2}, {Cell{1, 0}, Cell{3, 3}});
  const auto t = act(env, {kRight, kStay});
  EXPECT_EQ(t.reward, 1.0);
  EXPECT_EQ(env.hunters()[0], (Cell{1, 0}));
  EXPECT_NE(env.hares()[0], (Cell{1, 0}));

  env.place({Cell{2, 1}, Cell{4, 4}}, Cell{2, 2}, {Cell{0, 3}, Cell{0, 4}});
  act(env, {kDown, kStay});
  EXPECT_EQ(env.hunters()[0], (Cell{2, 1})) << "the stag's cell cannot be entered";
}

TEST(GridStagHunt, TorusGeometryAndObservationWidth) {
  GridStagHunt env;
  const auto first = env.reset(5);
  EXPECT_EQ(env.distance(Cell{0, 0}, Cell{4, 4}), 2);
  EXPECT_EQ(env.offset(Cell{0, 0}, Cell{4, 0}).x, -1);
  ASSERT_EQ(first.obs.size(), 2u);
  EXPECT_EQ(static_cast<int>(first.obs[0].size()), env.spec().obs_dim);
  EXPECT_EQ(env.spec().obs_dim, 2 + 3 * (2 + 2));
  EXPECT_EQ(static_cast<int>(first.state.size()), env.spec().state_dim);
  (void)kUp;
  (void)kLeft;
}

TEST(GridStagHunt, EpisodeLimitForcesTerminal) {
  GridStagHuntConfig cfg;
  cfg.episode_limit = 4;
  GridStagHunt env(cfg);
  env.reset(0);
  Transition t;
  for (int i = 0; i < 4; ++i) t = act(env, {kStay, kStay});
  EXPECT_TRUE(t.terminal);
  EXPECT_EQ(env.episode_step(), 4);
}

TEST(Skirmish, KillingTheLastEnemyWinsWithScaledReward) {
  Skirmish env;
  env.reset(0);
  env.place({{1, 1, 3, 0}, {0, 7, 0, 0}, {0, 6, 0, 0}}, {{2, 1, 1, 0}, {7, 7, 0, 0}, {7, 6, 0, 0}});
  const auto t = act(env, {Skirmish::kAttack, Skirmish::kNoop, Skirmish::kNoop});
  EXPECT_TRUE(t.terminal);
  ASSERT_TRUE(t.won.has_value());
  EXPECT_TRUE(*t.won);
  const double scale = 20.0 / (3 * (3 * 1.0 + 2.0) + 10.0);
  EXPECT_NEAR(t.reward, (1.0 + 2.0 + 10.0) * scale, 1e-12);
}

TEST(Skirmish, LosingAllAlliesIsALoss) {
  Skirmish env;
  env.reset(0);
  env.place({{1, 1, 1, 0}, {0, 7, 0, 0}, {0, 6, 0, 0}}, {{2, 1, 3, 0}, {7, 7, 0, 0}, {7, 6, 0, 0}});
  const auto t = act(env, {Skirmish::kNoop, Skirmish::kNoop, Skirmish::kNoop});
  EXPECT_TRUE(t.terminal);
  ASSERT_TRUE(t.won.has_value());
  EXPECT_FALSE(*t.won);
  EXPECT_EQ(t.reward, 0.0);
}

TEST(Skirmish, TimeoutReportsNoWin) {
  SkirmishConfig cfg;
  cfg.episode_limit = 2;
  Skirmish env(cfg);
  env.reset(0);
  act(env, {Skirmish::kNoop, Skirmish::kNoop, Skirmish::kNoop});
  const auto t = act(env, {Skirmish::kNoop, Skirmish::kNoop, Skirmish::kNoop});
  EXPECT_TRUE(t.terminal);
  ASSERT_TRUE(t.won.has_value());
  EXPECT_FALSE(*t.won);
}

TEST(Skirmish, DeadAlliesSeeNothing) {
  Skirmish env;
  env.reset(0);
  env.place({{1, 1, 3, 0}, {2, 2, 0, 0}, {0, 6, 2, 0}}, {{6, 1, 3, 0}, {7, 7, 3, 0}, {7, 6, 3, 0}});
  const auto t = act(env, {Skirmish::kNoop, Skirmish::kNoop, Skirmish::kNoop});
  for (double v : t.obs[1]) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(static_cast<int>(t.obs[0].size()), env.spec().obs_dim);
}

class EnvironmentContract : public ::testing::TestWithParam<EnvKind> {};

TEST_P(EnvironmentContract, ResetIsSeededAndStateRoundTrips) {
  EnvConfig cfg;
  cfg.kind = GetParam();
  cfg.matrix = stag_hunt_matrix(-1.0);
  auto a = make_environment(cfg);
  auto b = make_environment(cfg);
  const auto ta = a->reset(42);
  const auto tb = b->reset(42);
  EXPECT_EQ(ta.obs, tb.obs);
  EXPECT_EQ(ta.state, tb.state);

  const int n = a->spec().n_agents;
  std::vector<int> joint(static_cast<std::size_t>(n));
  for (int k = 0; k < 3; ++k) {
    for (int i = 0; i < n; ++i) joint[static_cast<std::size_t>(i)] = (k + i) % a->spec().n_actions;
    a->step(joint);
  }
  std::stringstream ss;
  io::BinaryWriter w(ss);
  a->write_state(w);
  io::BinaryReader r(ss);
  b->read_state(r);
  EXPECT_EQ(a->episode_step(), b->episode_step());
  while (!a->done()) {
    for (int i = 0; i < n; ++i) joint[static_cast<std::size_t>(i)] = (a->episode_step() * 7 + i) % a->spec().n_actions;
    const auto x = a->step(joint);
    const auto y = b->step(joint);
    ASSERT_EQ(x.reward, y.reward);
    ASSERT_EQ(x.obs, y.obs);
    ASSERT_EQ(x.terminal, y.terminal);
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, EnvironmentContract,
                         ::testing::Values(EnvKind::matrix_stag_hunt, EnvKind::matrix_game, EnvKind::grid_stag_hunt,
                                           EnvKind::skirmish));

TEST(Factory, NamesRoundTrip) {
  for (auto k : {EnvKind::matrix_stag_hunt, EnvKind::matrix_game, EnvKind::grid_stag_hunt, EnvKind::skirmish}) {
    EXPECT_EQ(parse_env_kind(to_string(k)), k);
  }
  EXPECT_ANY_THROW(parse_env_kind("starcraft"));
}

}  // namespace
}  // namespace ippo::env
