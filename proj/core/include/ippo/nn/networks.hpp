#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ippo/autodiff/ops.hpp"
#include "ippo/autodiff/parameters.hpp"
#include "ippo/autodiff/tape.hpp"
#include "ippo/util/random.hpp"

namespace ippo::nn {

enum class EncoderKind { conv1d, mlp };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& name);

/// Widths of the dense head that closes every encoder.
inline constexpr std::array<int, 2> kHeadWidths{256, 128};

/// Encoder architecture.
///
/// conv1d: the stacked input [frames, features] is read as `frames` channels
/// over a length-`features` signal and passed through three kernel-3
/// convolutions with `channels` filters, paddings (same, valid, valid) and
/// `conv_strides`, then the (256, 128) dense head.
/// mlp: dense ReLU layers of widths `channels`, which must end with (256, 128).
struct EncoderConfig {
  EncoderKind kind = EncoderKind::mlp;
  std::vector<int> channels{256, 128};
  int frames = 1;
  std::array<int, 3> conv_strides{2, 1, 1};

  void validate() const;
};

/// Fan-in variance scaling with a truncated normal (scale 2, cut at two
/// standard deviations of the untruncated normal, stddev corrected so the
/// truncated samples have variance scale / fan_in).
struct TruncatedNormalInit {
  static constexpr double kScale = 2.0;
  static constexpr double kTruncationCorrection = 0.87962566103423978;

  static double stddev(std::size_t fan_in);
  /// Largest magnitude a sample can take for this fan-in.
  static double bound(std::size_t fan_in);
  static std::vector<double> sample(std::size_t count, std::size_t fan_in, Rng& rng);
};

/// Encoder plus a linear output layer, evaluated on a batch of flattened
/// stacked inputs [B, frames * features].
class FeedForward {
 public:
  FeedForward(const EncoderConfig& config, int features, int outputs, Rng& rng, const std::string& prefix);

  ad::Tensor forward(ad::Tape& tape, const ad::Tensor& input) const;

  const ad::ParameterList& parameters() const { return params_; }
  const EncoderConfig& config() const { return config_; }
  int features() const { return features_; }
  int input_size() const { return config_.frames * features_; }
  int outputs() const { return outputs_; }

  /// Deep copy with independent storage.
  FeedForward clone() const;
  /// Sets the final layer's weights and bias to zero.
  void zero_output_layer() const;

 private:
  struct Dense {
    ad::Tensor weight;  // [in, out]
    ad::Tensor bias;    // [out]
  };
  struct Conv {
    ad::Tensor weight;  // [c_out, c_in, 3]
    ad::Tensor bias;    // [c_out]
    ad::Conv1dGeometry geometry;
  };

  FeedForward() = default;
  void rebuild_parameter_list(const std::string& prefix);

  EncoderConfig config_;
  int features_ = 0;
  int outputs_ = 0;
  std::vector<Conv> convs_;
  std::vector<Dense> dense_;
  std::string prefix_;
  ad::ParameterList params_;
};

/// Shared actor parameters (theta) and shared critic parameters (phi).
struct ParameterSet {
  FeedForward actor;
  FeedForward critic;

  std::vector<ad::Tensor> all() const;
  ad::ParameterList named() const;
  ParameterSet clone() const;
  /// Deep copy whose tensors do not require gradients (read-only snapshots).
  ParameterSet frozen() const;
  std::uint64_t checksum() const;
};

struct NetworkDims {
  int policy_features = 0;
  int critic_features = 0;
  int n_actions = 0;
};

ParameterSet init_parameters(const EncoderConfig& config, const NetworkDims& dims, std::uint64_t seed);

/// Action distribution for one stacked input (length frames * features).
std::vector<double> policy_forward(const FeedForward& theta, std::span<const double> stacked_obs);
/// Value estimate for one stacked input.
double value_forward(const FeedForward& phi, std::span<const double> stacked_input);

/// Batched variants on a [B, input_size] tensor.
ad::Tensor policy_log_probs(ad::Tape& tape, const FeedForward& theta, const ad::Tensor& inputs);
ad::Tensor values(ad::Tape& tape, const FeedForward& phi, const ad::Tensor& inputs);

/// Copies `features` and appends a one-hot encoding of `agent`.
std::vector<double> with_agent_id(std::span<const double> features, int agent, int n_agents);

}  // namespace ippo::nn
