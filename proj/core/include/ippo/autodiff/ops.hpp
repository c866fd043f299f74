#pragma once

#include <cstddef>
#include <span>

#include "ippo/autodiff/tape.hpp"
#include "ippo/autodiff/tensor.hpp"

// Differentiable primitives. Every function checks shapes (throwing ShapeError)
// and output finiteness (throwing NumericalError), and records itself on the
// tape when any input requires a gradient.
//
// Broadcasting is limited to adding a rank-1 bias over the last axis.
// Non-differentiable points take the first-argument branch: relu(0) passes the
// gradient through as max(x, 0) would for x, clamp passes it at the bounds,
// and minimum(a, b) sends it to `a` on ties.
namespace ippo::ad {

/// [m, k] x [k, n] -> [m, n]
Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b);
/// Same-shape elementwise sum, or `b` of shape [n] added to every row of `a` [..., n].
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor sub(Tape& tape, const Tensor& a, const Tensor& b);
Tensor mul(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scale(Tape& tape, const Tensor& a, double factor);
Tensor relu(Tape& tape, const Tensor& a);
Tensor exp(Tape& tape, const Tensor& a);
Tensor log(Tape& tape, const Tensor& a);
Tensor softmax(Tape& tape, const Tensor& a);
Tensor log_softmax(Tape& tape, const Tensor& a);
/// Picks a[i, index[i]] from a [m, n]; returns [m].
Tensor gather(Tape& tape, const Tensor& a, std::span<const int> index);
/// Sum of all elements as a scalar.
Tensor sum(Tape& tape, const Tensor& a);
/// Reduces the last axis: [..., n] -> [...].
Tensor sum_last_axis(Tape& tape, const Tensor& a);
Tensor mean(Tape& tape, const Tensor& a);
Tensor minimum(Tape& tape, const Tensor& a, const Tensor& b);
Tensor clamp(Tape& tape, const Tensor& a, double lo, double hi);
Tensor square(Tape& tape, const Tensor& a);
Tensor reshape(Tape& tape, const Tensor& a, Shape shape);

struct Conv1dGeometry {
  std::size_t stride = 1;
  std::size_t pad_left = 0;
  std::size_t pad_right = 0;

  /// Output length, zero when the padded input is shorter than the kernel.
  std::size_t output_length(std::size_t input_length, std::size_t kernel) const;
  /// TensorFlow-style "same" padding for the given stride.
  static Conv1dGeometry same(std::size_t input_length, std::size_t kernel, std::size_t stride);
  static Conv1dGeometry valid(std::size_t stride);
};

/// x [B, C_in, L], weight [C_out, C_in, K], bias [C_out] -> [B, C_out, L_out].
Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, const Conv1dGeometry& geometry);

}  // namespace ippo::ad
