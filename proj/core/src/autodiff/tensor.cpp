#include "ippo/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace ippo::ad {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

Tensor::Tensor() : impl_(std::make_shared<Impl>()) { impl_->data.assign(1, 0.0); }

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return filled(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  auto impl = std::make_shared<Impl>();
  impl->data.assign(numel(shape), value);
  impl->shape = std::move(shape);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  if (numel(shape) != data.size()) {
    throw ShapeError("tensor shape " + to_string(shape) + " does not hold " + std::to_string(data.size()) +
                     " values");
  }
  auto impl = std::make_shared<Impl>();
  impl->shape = std::move(shape);
  impl->data = std::move(data);
  impl->requires_grad = requires_grad;
  return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value, bool requires_grad) { return from({}, {value}, requires_grad); }

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= impl_->shape.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " + to_string(impl_->shape));
  }
  return impl_->shape[axis];
}

double Tensor::item() const {
  if (impl_->data.size() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(impl_->shape));
  }
  return impl_->data[0];
}

void Tensor::set_requires_grad(bool on) const { impl_->requires_grad = on; }

std::span<const double> Tensor::grad() const {
  if (!impl_->has_grad) return {};
  return impl_->grad;
}

std::span<double> Tensor::mutable_grad() const {
  if (!impl_->has_grad) {
    impl_->grad.assign(impl_->data.size(), 0.0);
    impl_->has_grad = true;
  }
  return impl_->grad;
}

void Tensor::accumulate_grad(std::span<const double> delta) const {
  if (!impl_->requires_grad) return;
  if (delta.size() != impl_->data.size()) {
    throw ShapeError("gradient of size " + std::to_string(delta.size()) + " for tensor of shape " +
                     to_string(impl_->shape));
  }
  auto g = mutable_grad();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void Tensor::zero_grad() const {
  if (impl_->has_grad) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::clear_grad() const {
  impl_->grad.clear();
  impl_->has_grad = false;
}

Tensor Tensor::clone() const {
  auto impl = std::make_shared<Impl>();
  impl->shape = impl_->shape;
  impl->data = impl_->data;
  impl->requires_grad = impl_->requires_grad;
  return Tensor(std::move(impl));
}

void Tensor::check_finite(const char* where) const {
  if (!all_finite(impl_->data)) {
    throw NumericalError(std::string("non-finite value produced by ") + where);
  }
}

}  // namespace ippo::ad
