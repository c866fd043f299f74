#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ippo::ad {

using Shape = std::vector<std::size_t>;

/// Number of elements described by a shape. The empty shape is a scalar.
std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised whenever a forward or backward pass would produce NaN or Inf.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense row-major tensor of doubles with an optional gradient buffer.
///
/// Tensor is a handle: copies share storage, `clone()` makes a deep copy.
/// Tensors created by users are leaves; tensors produced by a recorded
/// operation on a Tape are interior nodes.
class Tensor {
 public:
  Tensor();

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t size() const { return impl_->data.size(); }
  std::size_t dim(std::size_t axis) const;

  std::span<const double> data() const { return impl_->data; }
  std::span<double> mutable_data() const { return impl_->data; }
  double item() const;
  double operator[](std::size_t i) const { return impl_->data[i]; }

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool on) const;
  bool is_leaf() const { return impl_->leaf; }

  bool has_grad() const { return impl_->has_grad; }
  /// Gradient values; empty span when no gradient has been accumulated yet.
  std::span<const double> grad() const;
  /// Allocates a zeroed gradient buffer on first use.
  std::span<double> mutable_grad() const;
  /// Adds `delta` into the gradient buffer (no-op unless requires_grad).
  void accumulate_grad(std::span<const double> delta) const;
  /// Sets the gradient buffer to zero, keeping it allocated.
  void zero_grad() const;
  /// Drops the gradient buffer entirely.
  void clear_grad() const;

  /// Deep copy as a fresh leaf with the same requires_grad flag and no gradient.
  Tensor clone() const;
  /// Same storage (handle identity).
  bool same(const Tensor& other) const { return impl_ == other.impl_; }

  /// Throws NumericalError naming `where` if any value is NaN or Inf.
  void check_finite(const char* where) const;

 private:
  struct Impl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
    bool has_grad = false;
    bool leaf = true;
  };

  explicit Tensor(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<Impl> impl_;

  friend class Tape;
};

bool all_finite(std::span<const double> values);

}  // namespace ippo::ad
