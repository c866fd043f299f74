#include "ippo/nn/networks.hpp"

#include <cmath>
#include <stdexcept>

namespace ippo::nn {

std::string to_string(EncoderKind kind) { return kind == EncoderKind::conv1d ? "cnn" : "mlp"; }

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "cnn" || name == "conv1d") return EncoderKind::conv1d;
  if (name == "mlp") return EncoderKind::mlp;
  throw std::invalid_argument("unknown network type '" + name + "' (expected cnn or mlp)");
}

void EncoderConfig::validate() const {
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  for (int c : channels) {
    if (c < 1) throw std::invalid_argument("net arch widths must be positive");
  }
  if (kind == EncoderKind::conv1d) {
    if (channels.size() != 3) throw std::invalid_argument("cnn net arch needs exactly three channel counts");
    for (int s : conv_strides) {
      if (s < 1) throw std::invalid_argument("conv strides must be >= 1");
    }
  } else {
    const auto n = channels.size();
    if (n < 2 || channels[n - 2] != kHeadWidths[0] || channels[n - 1] != kHeadWidths[1]) {
      throw std::invalid_argument("mlp net arch must end with (256, 128)");
    }
  }
}

double TruncatedNormalInit::stddev(std::size_t fan_in) {
  return std::sqrt(kScale / static_cast<double>(fan_in)) / kTruncationCorrection;
}

double TruncatedNormalInit::bound(std::size_t fan_in) { return 2.0 * stddev(fan_in); }

std::vector<double> TruncatedNormalInit::sample(std::size_t count, std::size_t fan_in, Rng& rng) {
  const double sd = stddev(fan_in);
  std::normal_distribution<double> normal(0.0, sd);
  std::vector<double> out(count);
  for (auto& v : out) {
    do {
      v = normal(rng);
    } while (std::abs(v) > 2.0 * sd);
  }
  return out;
}

namespace {

ad::Tensor weights(ad::Shape shape, std::size_t fan_in, Rng& rng) {
  const auto n = ad::numel(shape);
  return ad::Tensor::from(std::move(shape), TruncatedNormalInit::sample(n, fan_in, rng), true);
}

}  // namespace

FeedForward::FeedForward(const EncoderConfig& config, int features, int outputs, Rng& rng, const std::string& prefix)
    : config_(config), features_(features), outputs_(outputs), prefix_(prefix) {
  config_.validate();
  if (features < 1 || outputs < 1) throw std::invalid_argument("network needs positive input and output widths");

  std::vector<int> hidden;
  std::size_t width = static_cast<std::size_t>(config_.frames * features);
  if (config_.kind == EncoderKind::conv1d) {
    std::size_t c_in = static_cast<std::size_t>(config_.frames);
    std::size_t len = static_cast<std::size_t>(features);
    for (std::size_t i = 0; i < 3; ++i) {
      const auto stride = static_cast<std::size_t>(config_.conv_strides[i]);
      const auto geo = i == 0 ? ad::Conv1dGeometry::same(len, 3, stride) : ad::Conv1dGeometry::valid(stride);
      const auto out_len = geo.output_length(len, 3);
      if (out_len == 0) {
        throw std::invalid_argument("observation width " + std::to_string(features) +
                                    " is too short for the cnn encoder");
      }
      const auto c_out = static_cast<std::size_t>(config_.channels[i]);
      convs_.push_back({weights({c_out, c_in, 3}, c_in * 3, rng), ad::Tensor::zeros({c_out}, true), geo});
      c_in = c_out;
      len = out_len;
    }
    width = c_in * len;
    hidden.assign(kHeadWidths.begin(), kHeadWidths.end());
  } else {
    hidden = config_.channels;
  }
  hidden.push_back(outputs);
  for (int h : hidden) {
    const auto out = static_cast<std::size_t>(h);
    dense_.push_back({weights({width, out}, width, rng), ad::Tensor::zeros({out}, true)});
    width = out;
  }
  rebuild_parameter_list(prefix);
}

void FeedForward::rebuild_parameter_list(const std::string& prefix) {
  params_.clear();
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    params_.push_back({prefix + ".conv" + std::to_string(i) + ".weight", convs_[i].weight});
    params_.push_back({prefix + ".conv" + std::to_string(i) + ".bias", convs_[i].bias});
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    params_.push_back({prefix + ".dense" + std::to_string(i) + ".weight", dense_[i].weight});
    params_.push_back({prefix + ".dense" + std::to_string(i) + ".bias", dense_[i].bias});
  }
}

ad::Tensor FeedForward::forward(ad::Tape& tape, const ad::Tensor& input) const {
  if (input.rank() != 2 || input.dim(1) != static_cast<std::size_t>(input_size())) {
    throw ad::ShapeError("network expects input [B, " + std::to_string(input_size()) + "], got " +
                         ad::to_string(input.shape()));
  }
  input.check_finite("network input");
  const auto batch = input.dim(0);
  ad::Tensor h = input;
  if (!convs_.empty()) {
    h = ad::reshape(tape, h, {batch, static_cast<std::size_t>(config_.frames), static_cast<std::size_t>(features_)});
    for (const auto& conv : convs_) h = ad::relu(tape, ad::conv1d(tape, h, conv.weight, conv.bias, conv.geometry));
    h = ad::reshape(tape, h, {batch, h.size() / batch});
  }
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    h = ad::add(tape, ad::matmul(tape, h, dense_[i].weight), dense_[i].bias);
    if (i + 1 < dense_.size()) h = ad::relu(tape, h);
  }
  return h;
}

FeedForward FeedForward::clone() const {
  FeedForward copy;
  copy.config_ = config_;
  copy.features_ = features_;
  copy.outputs_ = outputs_;
  copy.prefix_ = prefix_;
  for (const auto& c : convs_) copy.convs_.push_back({c.weight.clone(), c.bias.clone(), c.geometry});
  for (const auto& d : dense_) copy.dense_.push_back({d.weight.clone(), d.bias.clone()});
  copy.rebuild_parameter_list(prefix_);
  return copy;
}

void FeedForward::zero_output_layer() const {
  for (auto& v : dense_.back().weight.mutable_data()) v = 0.0;
  for (auto& v : dense_.back().bias.mutable_data()) v = 0.0;
}

std::vector<ad::Tensor> ParameterSet::all() const {
  std::vector<ad::Tensor> out;
  for (const auto& p : actor.parameters()) out.push_back(p.value);
  for (const auto& p : critic.parameters()) out.push_back(p.value);
  return out;
}

ad::ParameterList ParameterSet::named() const {
  ad::ParameterList out = actor.parameters();
  out.insert(out.end(), critic.parameters().begin(), critic.parameters().end());
  return out;
}

ParameterSet ParameterSet::clone() const { return {actor.clone(), critic.clone()}; }

ParameterSet ParameterSet::frozen() const {
  auto copy = clone();
  for (const auto& t : copy.all()) t.set_requires_grad(false);
  return copy;
}

std::uint64_t ParameterSet::checksum() const { return ad::checksum(named()); }

ParameterSet init_parameters(const EncoderConfig& config, const NetworkDims& dims, std::uint64_t seed) {
  Rng actor_rng(derive_seed(seed, 1));
  Rng critic_rng(derive_seed(seed, 2));
  return {FeedForward(config, dims.policy_features, dims.n_actions, actor_rng, "actor"),
          FeedForward(config, dims.critic_features, 1, critic_rng, "critic")};
}

std::vector<double> policy_forward(const FeedForward& theta, std::span<const double> stacked_obs) {
  ad::Tape tape;
  auto x = ad::Tensor::from({1, stacked_obs.size()}, {stacked_obs.begin(), stacked_obs.end()});
  auto probs = ad::softmax(tape, theta.forward(tape, x));
  return {probs.data().begin(), probs.data().end()};
}

double value_forward(const FeedForward& phi, std::span<const double> stacked_input) {
  ad::Tape tape;
  auto x = ad::Tensor::from({1, stacked_input.size()}, {stacked_input.begin(), stacked_input.end()});
  return phi.forward(tape, x).item();
}

ad::Tensor policy_log_probs(ad::Tape& tape, const FeedForward& theta, const ad::Tensor& inputs) {
  return ad::log_softmax(tape, theta.forward(tape, inputs));
}

ad::Tensor values(ad::Tape& tape, const FeedForward& phi, const ad::Tensor& inputs) {
  auto v = phi.forward(tape, inputs);
  return ad::reshape(tape, v, {inputs.dim(0)});
}

std::vector<double> with_agent_id(std::span<const double> features, int agent, int n_agents) {
  std::vector<double> out(features.begin(), features.end());
  out.resize(features.size() + static_cast<std::size_t>(n_agents), 0.0);
  out[features.size() + static_cast<std::size_t>(agent)] = 1.0;
  return out;
}

}  // namespace ippo::nn
