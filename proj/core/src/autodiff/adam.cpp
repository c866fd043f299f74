#include "ippo/autodiff/adam.hpp"

#include <cmath>

namespace ippo::ad {

Adam::Adam(std::vector<Tensor> params, AdamOptions options) : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    first_.emplace_back(p.size(), 0.0);
    second_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(options_.beta1, t);
  const double bias2 = 1.0 - std::pow(options_.beta2, t);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& p = params_[i];
    if (!p.has_grad()) continue;
    auto g = p.grad();
    auto x = p.mutable_data();
    auto& m = first_[i];
    auto& v = second_[i];
    for (std::size_t j = 0; j < x.size(); ++j) {
      m[j] = options_.beta1 * m[j] + (1.0 - options_.beta1) * g[j];
      v[j] = options_.beta2 * v[j] + (1.0 - options_.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bias1;
      const double v_hat = v[j] / bias2;
      x[j] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
}

void Adam::zero_grad() {
  for (const auto& p : params_) p.zero_grad();
}

void Adam::write_state(io::BinaryWriter& out) const {
  out.f64(options_.lr);
  out.f64(options_.beta1);
  out.f64(options_.beta2);
  out.f64(options_.eps);
  out.i64(steps_);
  out.u64(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.f64s(first_[i]);
    out.f64s(second_[i]);
  }
}

void Adam::read_state(io::BinaryReader& in) {
  options_.lr = in.f64();
  options_.beta1 = in.f64();
  options_.beta2 = in.f64();
  options_.eps = in.f64();
  steps_ = in.i64();
  if (in.u64() != params_.size()) throw io::FormatError("optimizer state does not match parameter count");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    first_[i] = in.f64s();
    second_[i] = in.f64s();
    if (first_[i].size() != params_[i].size() || second_[i].size() != params_[i].size()) {
      throw io::FormatError("optimizer moment size mismatch");
    }
  }
}

}  // namespace ippo::ad
