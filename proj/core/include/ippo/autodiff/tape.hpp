#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "ippo/autodiff/tensor.hpp"

namespace ippo::ad {

enum class OpKind {
  matmul,
  add,
  sub,
  mul,
  scale,
  relu,
  exp,
  log,
  softmax,
  log_softmax,
  gather,
  sum,
  sum_last_axis,
  mean,
  minimum,
  clamp,
  square,
  conv1d,
  reshape,
};

std::string_view op_name(OpKind kind);

/// Ordered record of primitive operations for reverse-mode differentiation.
///
/// Operations are appended in execution order, so every record's inputs were
/// produced before it. A tape is single-threaded; it may be moved between
/// threads but never shared.
class Tape {
 public:
  /// Reads `output.grad()` and accumulates into the inputs' gradients.
  using BackwardFn = std::function<void(const Tensor& output)>;

  struct Record {
    OpKind kind;
    std::vector<Tensor> inputs;
    Tensor output;
    BackwardFn backward;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// Checks `output` for non-finite values, then records the operation if any
  /// input requires a gradient. Returns `output`.
  Tensor record(OpKind kind, std::vector<Tensor> inputs, Tensor output, BackwardFn backward);

  /// Accumulates d(loss)/d(leaf) into every reachable leaf that requires a
  /// gradient. Interior gradients are recomputed from scratch on each call, so
  /// calling twice doubles the leaf gradients.
  void backward(const Tensor& loss);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<Record>& records() const { return records_; }
  void clear() { records_.clear(); }

 private:
  std::vector<Record> records_;
};

}  // namespace ippo::ad
