#include "ippo/train/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <stdexcept>
#include <thread>

#include <spdlog/spdlog.h>

namespace ippo::train {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::ippo: return "ippo";
    case Variant::ippo_no_value_clip: return "ippo_no_value_clip";
    case Variant::ippo_no_policy_clip: return "ippo_no_policy_clip";
    case Variant::iac: return "iac";
    case Variant::iac_low_lr: return "iac_low_lr";
    case Variant::mappo_central: return "mappo_central";
  }
  return "unknown";
}

std::vector<Variant> all_variants() {
  return {Variant::ippo, Variant::ippo_no_value_clip, Variant::ippo_no_policy_clip,
          Variant::iac,  Variant::iac_low_lr,         Variant::mappo_central};
}

Variant parse_variant(const std::string& name) {
  for (auto v : all_variants()) {
    if (to_string(v) == name) return v;
  }
  throw std::invalid_argument("unknown variant '" + name + "'");
}

loss::AlgoConfig AblationSpec::apply(const loss::AlgoConfig& base) const {
  auto cfg = base;
  cfg.policy_clip_enabled = true;
  cfg.value_clip_enabled = true;
  cfg.critic_mode = nn::CriticMode::local;
  switch (variant) {
    case Variant::ippo: break;
    case Variant::ippo_no_value_clip: cfg.value_clip_enabled = false; break;
    case Variant::ippo_no_policy_clip: cfg.policy_clip_enabled = false; break;
    case Variant::iac:
      cfg.policy_clip_enabled = false;
      cfg.value_clip_enabled = false;
      break;
    case Variant::iac_low_lr:
      if (!(lr_scale > 0.0)) throw std::invalid_argument("lr_scale must be > 0");
      cfg.policy_clip_enabled = false;
      cfg.value_clip_enabled = false;
      cfg.lr = base.lr * lr_scale;
      break;
    case Variant::mappo_central: cfg.critic_mode = nn::CriticMode::centralized; break;
  }
  return cfg;
}

std::vector<VariantRun> run_ablation_suite(const TrainOptions& base, std::span<const AblationSpec> variants,
                                           std::span<const std::uint64_t> seeds, int jobs, const RunHook& hook) {
  if (variants.empty()) throw std::invalid_argument("ablation suite needs at least one variant");
  if (seeds.empty()) throw std::invalid_argument("ablation suite needs at least one seed");

  std::vector<VariantRun> runs;
  for (const auto& spec : variants) {
    VariantRun run{spec, spec.apply(base.algo), {}};
    run.algo.validate();
    for (auto s : seeds) run.seeds.push_back({s, false, {}, {}, 0});
    runs.push_back(std::move(run));
  }

  const auto total = runs.size() * seeds.size();
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto k = next.fetch_add(1); k < total; k = next.fetch_add(1)) {
      auto& run = runs[k / seeds.size()];
      auto& out = run.seeds[k % seeds.size()];
      try {
        auto options = base;
        options.algo = run.algo;
        options.seed = out.seed;
        Trainer trainer(options);
        trainer.run();
        out.history = trainer.state().history;
        out.checksum = trainer.checksum();
        if (hook) hook(run.spec, out.seed, trainer);
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
        spdlog::error("{} seed {} failed: {}", to_string(run.spec.variant), out.seed, e.what());
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, jobs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < std::min(n_threads, total); ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return runs;
}

double metric_value(const EvalResult& r, const std::string& metric) {
  if (metric == "mean_return") return r.mean_return;
  if (metric == "win_rate") return r.win_rate;
  if (metric == "cooperative_rate") return r.cooperative_rate;
  throw std::invalid_argument("unknown metric '" + metric + "'");
}

metrics::CurveSet to_curves(const VariantRun& run, const std::string& metric) {
  metrics::CurveSet c;
  c.label = to_string(run.spec.variant);
  for (const auto& s : run.seeds) {
    if (!s.ok) continue;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& p : s.history) {
      xs.push_back(static_cast<double>(p.env_steps));
      ys.push_back(metric_value(p.result, metric));
    }
    if (c.seeds.empty()) {
      c.x = xs;
    } else if (xs != c.x) {
      throw std::logic_error("seeds of " + c.label + " were evaluated on different grids");
    }
    c.seed_names.push_back("seed_" + std::to_string(s.seed));
    c.seeds.push_back(std::move(ys));
  }
  return c;
}

}  // namespace ippo::train
