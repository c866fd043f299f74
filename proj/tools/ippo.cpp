#include <cstdlib>
#include <iostream>
#include <string>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "ippo/app/commands.hpp"

namespace {

void configure_logging() {
  const char* level = std::getenv("IPPO_LOG_LEVEL");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Independent PPO for cooperative multi-agent gridworlds"};
  app.require_subcommand(1);

  ippo::app::CommandOptions opts;
  std::string config;
  std::string out;
  std::string seeds;
  std::string checkpoint;
  int episodes = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "JSON run config");
    cmd->add_option("--out", out, "Output directory (overrides run.out_dir)");
    cmd->add_option("--seeds", seeds, "Comma-separated seeds (overrides run.seeds)");
  };
  auto* train = app.add_subcommand("train", "Train one variant on every seed");
  add_common(train);
  train->add_flag("--force", opts.force, "Write into a non-empty output directory");
  auto* ablate = app.add_subcommand("ablate", "Train the clip and critic ablation matrix");
  add_common(ablate);
  ablate->add_flag("--force", opts.force, "Write into a non-empty output directory");
  auto* eval = app.add_subcommand("eval", "Score a checkpoint with greedy actions");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes (default run.eval_episodes)")->check(CLI::PositiveNumber);
  auto* figure = app.add_subcommand("figure", "Regenerate plots from stored metrics");
  add_common(figure);

  CLI11_PARSE(app, argc, argv);

  return ippo::app::guarded(
      [&] {
        if (!config.empty()) opts.config = config;
        if (!out.empty()) opts.out = out;
        if (!seeds.empty()) opts.seeds = ippo::app::parse_seed_list(seeds);
        if (!checkpoint.empty()) opts.checkpoint = checkpoint;
        if (episodes > 0) opts.episodes = episodes;
        if (train->parsed()) ippo::app::command_train(opts, std::cout);
        if (ablate->parsed()) ippo::app::command_ablate(opts, std::cout);
        if (eval->parsed()) ippo::app::command_eval(opts, std::cout);
        if (figure->parsed()) ippo::app::command_figure(opts, std::cout);
      },
      std::cerr);
}
