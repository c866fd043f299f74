#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <vector>

#include "ippo/util/binary_io.hpp"

namespace ippo::nn {

/// Concatenates the last `frames` entries of `history` oldest-first, padding
/// the front with zero frames when the history is shorter. Every entry must
/// have the same width.
std::vector<double> stack_frames(std::span<const std::vector<double>> history, int frames);

/// Rolling per-agent history buffer; reset() at episode boundaries.
class FrameStack {
 public:
  FrameStack(int frames, std::size_t width);

  void reset() { history_.clear(); }
  void push(std::span<const double> frame);
  std::vector<double> stacked() const;

  int frames() const { return frames_; }
  std::size_t width() const { return width_; }
  std::size_t depth() const { return history_.size(); }

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 private:
  int frames_;
  std::size_t width_;
  std::deque<std::vector<double>> history_;
};

/// Per-feature running mean / variance used for the "norm input" option.
class RunningNormalizer {
 public:
  explicit RunningNormalizer(std::size_t width = 0, double clip = 10.0);

  void update(std::span<const double> sample);
  /// Folds another accumulator into this one (parallel-variance merge).
  void merge(const RunningNormalizer& other);
  /// (x - mean) / sqrt(var + 1e-8), clipped to [-clip, clip]. Identity before any update.
  std::vector<double> apply(std::span<const double> sample) const;

  std::size_t width() const { return mean_.size(); }
  double count() const { return count_; }
  std::span<const double> mean() const { return mean_; }
  std::vector<double> variance() const;

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 private:
  double count_ = 0.0;
  double clip_;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

}  // namespace ippo::nn
