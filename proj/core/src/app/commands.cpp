#include "ippo/app/commands.hpp"

#include <fstream>
#include <mutex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ippo/metrics/curves.hpp"
#include "ippo/train/ablation.hpp"

namespace ippo::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kMetrics = {"mean_return", "win_rate", "cooperative_rate"};

void prepare_out_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw CommandError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !force) {
      throw CommandError("output directory " + dir.string() + " is not empty (use --force to write into it)");
    }
  }
  fs::create_directories(dir / "checkpoints");
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream os(path);
  if (!os) throw CommandError("cannot write " + path.string());
  os << doc.dump(2) << '\n';
}

train::TrainOptions train_options(const RunConfig& cfg) {
  train::TrainOptions o;
  o.algo = cfg.algo;
  o.env = cfg.env;
  o.iterations = cfg.run.iterations;
  o.eval_every = cfg.run.eval_every;
  o.eval_episodes = cfg.run.eval_episodes;
  o.workers = cfg.run.workers;
  return o;
}

/// Trains the given variants on every seed and writes checkpoints, curves and a summary.
void run_suite(const RunConfig& cfg, const std::vector<train::AblationSpec>& specs, const std::string& experiment,
               bool force, std::ostream& log) {
  const auto& out = cfg.run.out_dir;
  prepare_out_dir(out, force);
  const auto effective = to_json(cfg);
  write_json(out / "config.json", effective);

  auto base = train_options(cfg);
  std::mutex io_mutex;

  // Each run's checkpoint carries its own effective config.
  std::vector<train::VariantRun> results;
  for (const auto& spec : specs) {
    auto variant_cfg = effective;
    const auto algo = spec.apply(cfg.algo);
    variant_cfg["algo"]["policy_clip"] = algo.policy_clip_enabled;
    variant_cfg["algo"]["value_clip"] = algo.value_clip_enabled;
    variant_cfg["algo"]["critic_mode"] = nn::to_string(algo.critic_mode);
    variant_cfg["algo"]["lr"] = algo.lr;
    variant_cfg["run"]["variant"] = train::to_string(spec.variant);
    variant_cfg["run"]["variants"] = json::array();
    auto options = base;
    options.metadata = variant_cfg.dump();
    const std::vector<train::AblationSpec> one{spec};
    auto runs = train::run_ablation_suite(options, one, cfg.run.seeds, cfg.run.jobs,
                                          [&](const train::AblationSpec& s, std::uint64_t seed, const train::Trainer& t) {
                                            std::lock_guard lock(io_mutex);
                                            const auto path = out / "checkpoints" /
                                                              (train::to_string(s.variant) + "_seed" +
                                                               std::to_string(seed) + ".ckpt");
                                            t.save_checkpoint(path);
                                          });
    results.push_back(std::move(runs.front()));
  }

  json summary = json::array();
  bool any_ok = false;
  for (const auto& r : results) {
    for (const auto& s : r.seeds) {
      json entry = {{"variant", train::to_string(r.spec.variant)}, {"seed", s.seed}, {"ok", s.ok}};
      if (s.ok && !s.history.empty()) {
        const auto& last = s.history.back();
        entry["checksum"] = s.checksum;
        entry["env_steps"] = last.env_steps;
        for (const auto& m : kMetrics) entry[m] = train::metric_value(last.result, m);
        any_ok = true;
      } else {
        entry["error"] = s.error;
      }
      summary.push_back(entry);
      log << entry.dump() << '\n';
    }
  }
  write_json(out / "summary.json", summary);
  if (!any_ok) throw CommandError("every run failed");

  for (const auto& m : kMetrics) {
    metrics::Figure fig{experiment, env::to_string(cfg.env.kind), m, metrics::is_unit_interval_metric(m), {}};
    for (const auto& r : results) {
      auto curves = train::to_curves(r, m);
      if (!curves.seeds.empty()) fig.curves.push_back(std::move(curves));
    }
    for (const auto& p : metrics::emit(fig, out / "metrics")) spdlog::info("wrote {}", p.string());
  }
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw CommandError("--seeds: empty entry in '" + text + "'");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      if (item.front() == '-') throw std::invalid_argument("negative");
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      throw CommandError("--seeds: '" + item + "' is not a non-negative integer");
    }
    if (used != item.size()) throw CommandError("--seeds: '" + item + "' is not a non-negative integer");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw CommandError("--seeds: no seeds given");
  return seeds;
}

RunConfig resolve_config(const CommandOptions& options) {
  if (!options.config) throw CommandError("--config is required");
  auto cfg = parse_config(*options.config);
  if (options.out) cfg.run.out_dir = *options.out;
  if (options.seeds) cfg.run.seeds = *options.seeds;
  return cfg;
}

void command_train(const CommandOptions& options, std::ostream& log) {
  const auto cfg = resolve_config(options);
  run_suite(cfg, {train::AblationSpec{train::parse_variant(cfg.run.variant), cfg.run.lr_scale}}, "train",
            options.force, log);
}

void command_ablate(const CommandOptions& options, std::ostream& log) {
  const auto cfg = resolve_config(options);
  std::vector<train::AblationSpec> specs;
  if (cfg.run.variants.empty()) {
    for (auto v : train::all_variants()) specs.push_back({v, cfg.run.lr_scale});
  } else {
    for (const auto& v : cfg.run.variants) specs.push_back({train::parse_variant(v), cfg.run.lr_scale});
  }
  run_suite(cfg, specs, "ablation", options.force, log);
}

void command_eval(const CommandOptions& options, std::ostream& out) {
  if (!options.checkpoint) throw CommandError("--checkpoint is required");
  // Checkpoint metadata already holds the variant's effective algo block.
  RunConfig cfg;
  auto topts = train::TrainOptions{};
  if (options.config) {
    cfg = resolve_config(options);
    topts = train_options(cfg);
    topts.algo = train::AblationSpec{train::parse_variant(cfg.run.variant), cfg.run.lr_scale}.apply(cfg.algo);
  } else {
    cfg = parse_config_text(train::read_checkpoint_metadata(*options.checkpoint));
    if (options.seeds) cfg.run.seeds = *options.seeds;
    topts = train_options(cfg);
  }
  train::Trainer trainer(topts);
  trainer.load_checkpoint(*options.checkpoint);
  const int episodes = options.episodes.value_or(cfg.run.eval_episodes);
  const auto& coll = trainer.collector();
  const bool norm = topts.algo.norm_input;
  const auto before = trainer.checksum();
  const auto r = train::evaluate(trainer.params(), env::make_factory(cfg.env), topts.algo.inputs(), episodes,
                                 cfg.run.seeds.front(), norm ? &coll.obs_normalizer() : nullptr,
                                 norm ? &coll.state_normalizer() : nullptr);
  if (trainer.checksum() != before) throw std::logic_error("evaluation changed the parameters");
  out << json{{"checkpoint", options.checkpoint->string()},
              {"iteration", trainer.state().iteration},
              {"episodes", episodes},
              {"mean_return", r.mean_return},
              {"win_rate", r.win_rate},
              {"cooperative_rate", r.cooperative_rate}}
             .dump()
      << '\n';
}

void command_figure(const CommandOptions& options, std::ostream& log) {
  fs::path root;
  if (options.out) {
    root = *options.out;
  } else if (options.config) {
    root = resolve_config(options).run.out_dir;
  } else {
    throw CommandError("figure needs --out or --config");
  }
  const auto figures = metrics::load_figures(root / "metrics");
  if (figures.empty()) throw CommandError("no metrics found under " + (root / "metrics").string());
  for (const auto& fig : figures) {
    for (const auto& c : fig.curves) c.validate(fig.unit_interval);
    const auto dir = root / "figures" / fig.experiment / fig.env;
    fs::create_directories(dir);
    const auto path = dir / (fig.metric + ".svg");
    std::ofstream os(path);
    if (!os) throw CommandError("cannot write " + path.string());
    os << metrics::render_svg(fig);
    log << path.string() << '\n';
  }
}

int guarded(const std::function<void()>& fn, std::ostream& err) {
  try {
    fn();
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ippo::app
