#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ippo/metrics/curves.hpp"
#include "ippo/train/trainer.hpp"

namespace ippo::train {

enum class Variant { ippo, ippo_no_value_clip, ippo_no_policy_clip, iac, iac_low_lr, mappo_central };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
std::vector<Variant> all_variants();

/// A variant fixes (policy clip, value clip, critic mode); lr_scale only
/// affects iac_low_lr.
struct AblationSpec {
  Variant variant = Variant::ippo;
  double lr_scale = 0.1;

  loss::AlgoConfig apply(const loss::AlgoConfig& base) const;
};

struct SeedRun {
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<EvalPoint> history;
  std::uint64_t checksum = 0;
};

struct VariantRun {
  AblationSpec spec;
  loss::AlgoConfig algo;
  std::vector<SeedRun> seeds;
};

/// Called once per finished (variant, seed) run, possibly from a worker thread.
using RunHook = std::function<void(const AblationSpec&, std::uint64_t seed, const Trainer&)>;

/// Trains every variant on every seed; seed s gives the same environment and
/// rollout streams to every variant. A failing seed is recorded and skipped.
std::vector<VariantRun> run_ablation_suite(const TrainOptions& base, std::span<const AblationSpec> variants,
                                           std::span<const std::uint64_t> seeds, int jobs = 1,
                                           const RunHook& hook = {});

/// Successful seeds of one variant as a curve over env steps.
/// `metric` is one of mean_return, win_rate, cooperative_rate.
metrics::CurveSet to_curves(const VariantRun& run, const std::string& metric);

double metric_value(const EvalResult& r, const std::string& metric);

}  // namespace ippo::train
