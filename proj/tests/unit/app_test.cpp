#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ippo/app/commands.hpp"
#include "ippo/app/config.hpp"

namespace ippo::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigTakesDefaults) {
  const auto cfg = parse_config_text(R"({"env": "matrix_stag_hunt", "run": {"seeds": [0, 1, 2]}})");
  EXPECT_EQ(cfg.run.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  const auto echo = to_json(cfg);
  EXPECT_EQ(echo["algo"]["eps_clip"].get<double>(), 0.2);
  EXPECT_EQ(echo["algo"]["gamma"].get<double>(), 0.99);
  EXPECT_EQ(echo["algo"]["lam"].get<double>(), 0.95);
  EXPECT_EQ(echo["algo"]["grad_norm"].get<double>(), 0.5);
  EXPECT_EQ(echo["algo"]["n_actors"].get<int>(), 8);
  EXPECT_EQ(echo["algo"]["lr"].get<double>(), 1e-4);
  EXPECT_EQ(echo["algo"]["mini_epochs"].get<int>(), 4);
  EXPECT_EQ(echo["algo"]["mini_batch"].get<int>(), 1024);
  EXPECT_EQ(echo["algo"]["steps_num"].get<int>(), 128);
  EXPECT_EQ(echo["algo"]["entropy_coef"].get<double>(), 0.005);
}

TEST(Config, EchoParsesBackToTheSameConfig) {
  const auto cfg = parse_config_text(
      R"({"env": {"name": "skirmish", "n_allies": 3}, "algo": {"type": "cnn", "frames": 4, "value_clip_pessimism": "conventional_max"}})");
  EXPECT_EQ(to_json(parse_config_json(to_json(cfg))), to_json(cfg));
  EXPECT_EQ(cfg.algo.network.channels, (std::vector<int>{64, 128, 256}));
}

TEST(Config, RejectsOutOfRangeValuesNamingTheKey) {
  EXPECT_NE(error_of(R"({"env": "skirmish", "algo": {"mini_epochs": 0}})").find("algo.mini_epochs"), std::string::npos);
  EXPECT_NE(error_of(R"({"env": "skirmish", "algo": {"eps_clip": 0}})").find("algo.eps_clip"), std::string::npos);
  EXPECT_NE(error_of(R"({"env": "skirmish", "algo": {"lr": 0}})").find("algo.lr"), std::string::npos);
  EXPECT_NE(error_of(R"({"env": "skirmish", "run": {"seeds": []}})").find("run.seeds"), std::string::npos);
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  const auto unknown = error_of(R"({"env": "skirmish", "algo": {"learning_rate_schedule": "linear"}})");
  EXPECT_NE(unknown.find("learning_rate_schedule"), std::string::npos);
  EXPECT_NE(error_of(R"({"env": "skirmish", "algo": {"lr": "fast"}})").find("algo.lr"), std::string::npos);
  EXPECT_NE(error_of(R"({"env": {"name": "chess"}})").find("env.name"), std::string::npos);
  EXPECT_NE(error_of(R"({"algo": {}})").find("env"), std::string::npos);
  EXPECT_THROW(parse_config(fs::path("/nonexistent/config.json")), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(IPPO_CONFIG_DIR)) {
    EXPECT_NO_THROW(parse_config(e.path())) << e.path();
    ++n;
  }
  EXPECT_GE(n, 3u);
}

TEST(Commands, SeedList) {
  EXPECT_EQ(parse_seed_list("0,1,2"), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(parse_seed_list("7"), (std::vector<std::uint64_t>{7}));
  EXPECT_THROW(parse_seed_list("1,,2"), CommandError);
  EXPECT_THROW(parse_seed_list("x"), CommandError);
  EXPECT_THROW(parse_seed_list("-1"), CommandError);
  EXPECT_THROW(parse_seed_list(""), CommandError);
}

class CommandsOnDisk : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("ippo_app_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = root_ / "config.json";
    std::ofstream(config_) << json{
        {"env", {{"name", "matrix_stag_hunt"}, {"penalty", 0.0}, {"horizon", 4}}},
        {"algo", {{"n_actors", 2}, {"steps_num", 8}, {"mini_batch", 16}, {"mini_epochs", 1}}},
        {"run", {{"seeds", {0}}, {"iterations", 2}, {"eval_every", 1}, {"eval_episodes", 2}}}}
                                  .dump();
  }
  void TearDown() override { fs::remove_all(root_); }

  CommandOptions options(const std::string& out) const {
    CommandOptions o;
    o.config = config_;
    o.out = root_ / out;
    return o;
  }

  static std::size_t count(const fs::path& dir, const std::string& ext) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.path().extension() == ext;
    return n;
  }

  fs::path root_;
  fs::path config_;
};

TEST_F(CommandsOnDisk, TrainWritesOneCheckpointPerSeedAndCurves) {
  auto o = options("train");
  o.seeds = std::vector<std::uint64_t>{0, 1, 2};
  std::ostringstream log;
  command_train(o, log);
  EXPECT_EQ(count(root_ / "train" / "checkpoints", ".ckpt"), 3u);
  EXPECT_GE(count(root_ / "train" / "metrics", ".csv"), 1u);
  EXPECT_TRUE(fs::exists(root_ / "train" / "config.json"));
  EXPECT_TRUE(fs::exists(root_ / "train" / "summary.json"));

  std::ostringstream err;
  EXPECT_NE(guarded([&] { command_train(o, log); }, err), 0);
  EXPECT_NE(err.str().find("--force"), std::string::npos);
  o.force = true;
  EXPECT_EQ(guarded([&] { command_train(o, log); }, err), 0);
}

TEST_F(CommandsOnDisk, AblateWritesOneCurveFamilyPerVariant) {
  std::ofstream(config_) << json{{"env", {{"name", "matrix_stag_hunt"}, {"horizon", 4}}},
                                 {"algo", {{"n_actors", 2}, {"steps_num", 8}, {"mini_batch", 16}, {"mini_epochs", 1}}},
                                 {"run",
                                  {{"seeds", {0, 1}},
                                   {"iterations", 1},
                                   {"eval_every", 1},
                                   {"eval_episodes", 1},
                                   {"variants", {"ippo", "iac"}}}}}
                                    .dump();
  std::ostringstream log;
  command_ablate(options("ablate"), log);
  std::set<std::string> families;
  for (const auto& e : fs::recursive_directory_iterator(root_ / "ablate" / "metrics")) {
    if (e.path().extension() == ".csv") families.insert(e.path().filename().string().substr(0, e.path().filename().string().find('.')));
  }
  EXPECT_EQ(families, (std::set<std::string>{"ippo", "iac"}));
  EXPECT_EQ(count(root_ / "ablate" / "checkpoints", ".ckpt"), 4u);
}

TEST_F(CommandsOnDisk, EvalScoresACheckpointWithoutChangingIt) {
  std::ostringstream log;
  command_train(options("run"), log);
  CommandOptions e;
  e.checkpoint = root_ / "run" / "checkpoints" / "ippo_seed0.ckpt";
  e.episodes = 3;
  std::ostringstream out;
  command_eval(e, out);
  const auto line = json::parse(out.str());
  EXPECT_EQ(line["episodes"].get<int>(), 3);
  EXPECT_TRUE(line.contains("mean_return"));
  EXPECT_TRUE(line.contains("win_rate"));
}

TEST_F(CommandsOnDisk, FigureNeedsMetrics) {
  std::ostringstream err;
  EXPECT_NE(guarded([&] { command_figure(options("empty"), err); }, err), 0);
  EXPECT_NE(err.str().find("no metrics found"), std::string::npos);

  std::ostringstream log;
  command_train(options("run"), log);
  command_figure(options("run"), log);
  EXPECT_GE(count(root_ / "run" / "figures", ".svg"), 1u);
}

}  // namespace
}  // namespace ippo::app
