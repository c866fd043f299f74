#include "ippo/nn/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ippo::nn {

std::vector<double> stack_frames(std::span<const std::vector<double>> history, int frames) {
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  if (history.empty()) throw std::invalid_argument("stack_frames needs at least the current observation");
  const auto width = history.back().size();
  const auto n = static_cast<std::size_t>(frames);
  std::vector<double> out(n * width, 0.0);
  const auto used = std::min(n, history.size());
  const auto first = history.size() - used;
  for (std::size_t i = 0; i < used; ++i) {
    const auto& frame = history[first + i];
    if (frame.size() != width) throw std::invalid_argument("stack_frames: frames of unequal width");
    std::copy(frame.begin(), frame.end(), out.begin() + static_cast<std::ptrdiff_t>((n - used + i) * width));
  }
  return out;
}

FrameStack::FrameStack(int frames, std::size_t width) : frames_(frames), width_(width) {
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
}

void FrameStack::push(std::span<const double> frame) {
  if (frame.size() != width_) throw std::invalid_argument("FrameStack::push: wrong frame width");
  history_.emplace_back(frame.begin(), frame.end());
  while (history_.size() > static_cast<std::size_t>(frames_)) history_.pop_front();
}

std::vector<double> FrameStack::stacked() const {
  const auto n = static_cast<std::size_t>(frames_);
  std::vector<double> out(n * width_, 0.0);
  const auto offset = n - history_.size();
  for (std::size_t i = 0; i < history_.size(); ++i) {
    std::copy(history_[i].begin(), history_[i].end(), out.begin() + static_cast<std::ptrdiff_t>((offset + i) * width_));
  }
  return out;
}

void FrameStack::write_state(io::BinaryWriter& out) const {
  out.u64(history_.size());
  for (const auto& f : history_) out.f64s(f);
}

void FrameStack::read_state(io::BinaryReader& in) {
  const auto n = in.u64();
  if (n > static_cast<std::uint64_t>(frames_)) throw io::FormatError("frame history deeper than frame count");
  history_.clear();
  for (std::uint64_t i = 0; i < n; ++i) {
    auto f = in.f64s();
    if (f.size() != width_) throw io::FormatError("frame width mismatch");
    history_.push_back(std::move(f));
  }
}

RunningNormalizer::RunningNormalizer(std::size_t width, double clip)
    : clip_(clip), mean_(width, 0.0), m2_(width, 0.0) {}

void RunningNormalizer::update(std::span<const double> sample) {
  if (sample.size() != mean_.size()) throw std::invalid_argument("normalizer width mismatch");
  count_ += 1.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double delta = sample[i] - mean_[i];
    mean_[i] += delta / count_;
    m2_[i] += delta * (sample[i] - mean_[i]);
  }
}

void RunningNormalizer::merge(const RunningNormalizer& other) {
  if (other.width() != width()) throw std::invalid_argument("normalizer width mismatch");
  if (other.count_ == 0.0) return;
  const double total = count_ + other.count_;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] += delta * other.count_ / total;
    m2_[i] += other.m2_[i] + delta * delta * count_ * other.count_ / total;
  }
  count_ = total;
}

std::vector<double> RunningNormalizer::variance() const {
  std::vector<double> var(m2_.size(), 0.0);
  if (count_ > 0.0) {
    for (std::size_t i = 0; i < var.size(); ++i) var[i] = m2_[i] / count_;
  }
  return var;
}

std::vector<double> RunningNormalizer::apply(std::span<const double> sample) const {
  if (sample.size() != mean_.size()) throw std::invalid_argument("normalizer width mismatch");
  std::vector<double> out(sample.begin(), sample.end());
  if (count_ == 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double z = (sample[i] - mean_[i]) / std::sqrt(m2_[i] / count_ + 1e-8);
    out[i] = std::clamp(z, -clip_, clip_);
  }
  return out;
}

void RunningNormalizer::write_state(io::BinaryWriter& out) const {
  out.f64(count_);
  out.f64(clip_);
  out.f64s(mean_);
  out.f64s(m2_);
}

void RunningNormalizer::read_state(io::BinaryReader& in) {
  count_ = in.f64();
  clip_ = in.f64();
  mean_ = in.f64s();
  m2_ = in.f64s();
  if (mean_.size() != m2_.size()) throw io::FormatError("normalizer state mismatch");
}

}  // namespace ippo::nn
