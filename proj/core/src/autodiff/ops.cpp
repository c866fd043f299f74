#include "ippo/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ippo::ad {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

[[noreturn]] void shape_mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     to_string(a.shape()));
  }
}

std::size_t last_extent(const char* op, const Tensor& a) {
  if (a.rank() == 0) throw ShapeError(std::string(op) + ": needs at least one axis");
  return a.shape().back();
}

template <class F>
Tensor unary(Tape& tape, OpKind kind, const Tensor& a, F&& f, Tape::BackwardFn backward) {
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  auto x = a.data();
  for (std::size_t i = 0; i < x.size(); ++i) o[i] = f(x[i]);
  return tape.record(kind, {a}, out, std::move(backward));
}

}  // namespace

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) shape_mismatch("matmul", a, b);
  auto out = Tensor::zeros({m, n});
  MutMap(out.mutable_data().data(), m, n).noalias() =
      ConstMap(a.data().data(), m, k) * ConstMap(b.data().data(), k, n);
  return tape.record(OpKind::matmul, {a, b}, out, [a, b, m, k, n](const Tensor& y) {
    ConstMap g(y.grad().data(), m, n);
    if (a.requires_grad()) {
      MutMap(a.mutable_grad().data(), m, k).noalias() += g * ConstMap(b.data().data(), k, n).transpose();
    }
    if (b.requires_grad()) {
      MutMap(b.mutable_grad().data(), k, n).noalias() += ConstMap(a.data().data(), m, k).transpose() * g;
    }
  });
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    auto out = Tensor::zeros(a.shape());
    auto o = out.mutable_data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i];
    return tape.record(OpKind::add, {a, b}, out, [a, b](const Tensor& y) {
      a.accumulate_grad(y.grad());
      b.accumulate_grad(y.grad());
    });
  }
  if (b.rank() != 1 || a.rank() == 0 || a.shape().back() != b.size()) shape_mismatch("add", a, b);
  const auto n = b.size();
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] + b[i % n];
  return tape.record(OpKind::add, {a, b}, out, [a, b, n](const Tensor& y) {
    a.accumulate_grad(y.grad());
    if (b.requires_grad()) {
      auto g = y.grad();
      auto gb = b.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % n] += g[i];
    }
  });
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("sub", a, b);
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] - b[i];
  return tape.record(OpKind::sub, {a, b}, out, [a, b](const Tensor& y) {
    a.accumulate_grad(y.grad());
    if (b.requires_grad()) {
      auto g = y.grad();
      auto gb = b.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("mul", a, b);
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] * b[i];
  return tape.record(OpKind::mul, {a, b}, out, [a, b](const Tensor& y) {
    auto g = y.grad();
    if (a.requires_grad()) {
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
    }
    if (b.requires_grad()) {
      auto gb = b.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
    }
  });
}

Tensor scale(Tape& tape, const Tensor& a, double factor) {
  return unary(tape, OpKind::scale, a, [factor](double x) { return x * factor; }, [a, factor](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
  });
}

Tensor relu(Tape& tape, const Tensor& a) {
  return unary(tape, OpKind::relu, a, [](double x) { return x > 0.0 ? x : 0.0; }, [a](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (a[i] >= 0.0) ga[i] += g[i];
    }
  });
}

Tensor exp(Tape& tape, const Tensor& a) {
  return unary(tape, OpKind::exp, a, [](double x) { return std::exp(x); }, [a](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i];
  });
}

Tensor log(Tape& tape, const Tensor& a) {
  return unary(tape, OpKind::log, a, [](double x) { return std::log(x); }, [a](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / a[i];
  });
}

Tensor softmax(Tape& tape, const Tensor& a) {
  const auto n = last_extent("softmax", a);
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t row = 0; row < a.size(); row += n) {
    double mx = a[row];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, a[row + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (o[row + j] = std::exp(a[row + j] - mx));
    for (std::size_t j = 0; j < n; ++j) o[row + j] /= z;
  }
  return tape.record(OpKind::softmax, {a}, out, [a, n](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t row = 0; row < g.size(); row += n) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += g[row + j] * y[row + j];
      for (std::size_t j = 0; j < n; ++j) ga[row + j] += y[row + j] * (g[row + j] - dot);
    }
  });
}

Tensor log_softmax(Tape& tape, const Tensor& a) {
  const auto n = last_extent("log_softmax", a);
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t row = 0; row < a.size(); row += n) {
    double mx = a[row];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, a[row + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(a[row + j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < n; ++j) o[row + j] = a[row + j] - lse;
  }
  return tape.record(OpKind::log_softmax, {a}, out, [a, n](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t row = 0; row < g.size(); row += n) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += g[row + j];
      for (std::size_t j = 0; j < n; ++j) ga[row + j] += g[row + j] - std::exp(y[row + j]) * total;
    }
  });
}

Tensor gather(Tape& tape, const Tensor& a, std::span<const int> index) {
  require_rank("gather", a, 2);
  const auto m = a.dim(0), n = a.dim(1);
  if (index.size() != m) {
    throw ShapeError("gather: " + std::to_string(index.size()) + " indices for " + std::to_string(m) + " rows");
  }
  std::vector<int> idx(index.begin(), index.end());
  auto out = Tensor::zeros({m});
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < m; ++i) {
    if (idx[i] < 0 || static_cast<std::size_t>(idx[i]) >= n) {
      throw ShapeError("gather: index " + std::to_string(idx[i]) + " out of range [0, " + std::to_string(n) + ")");
    }
    o[i] = a[i * n + static_cast<std::size_t>(idx[i])];
  }
  return tape.record(OpKind::gather, {a}, out, [a, n, idx = std::move(idx)](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i * n + static_cast<std::size_t>(idx[i])] += g[i];
  });
}

Tensor sum(Tape& tape, const Tensor& a) {
  double total = 0.0;
  for (double v : a.data()) total += v;
  return tape.record(OpKind::sum, {a}, Tensor::scalar(total), [a](const Tensor& y) {
    const double g = y.grad()[0];
    auto ga = a.mutable_grad();
    for (auto& v : ga) v += g;
  });
}

Tensor sum_last_axis(Tape& tape, const Tensor& a) {
  const auto n = last_extent("sum_last_axis", a);
  Shape shape(a.shape().begin(), a.shape().end() - 1);
  auto out = Tensor::zeros(std::move(shape));
  auto o = out.mutable_data();
  for (std::size_t r = 0; r < o.size(); ++r) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += a[r * n + j];
    o[r] = total;
  }
  return tape.record(OpKind::sum_last_axis, {a}, out, [a, n](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t r = 0; r < g.size(); ++r) {
      for (std::size_t j = 0; j < n; ++j) ga[r * n + j] += g[r];
    }
  });
}

Tensor mean(Tape& tape, const Tensor& a) {
  if (a.size() == 0) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double v : a.data()) total += v;
  const double n = static_cast<double>(a.size());
  return tape.record(OpKind::mean, {a}, Tensor::scalar(total / n), [a, n](const Tensor& y) {
    const double g = y.grad()[0] / n;
    auto ga = a.mutable_grad();
    for (auto& v : ga) v += g;
  });
}

Tensor minimum(Tape& tape, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) shape_mismatch("minimum", a, b);
  auto out = Tensor::zeros(a.shape());
  auto o = out.mutable_data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = a[i] <= b[i] ? a[i] : b[i];
  return tape.record(OpKind::minimum, {a, b}, out, [a, b](const Tensor& y) {
    auto g = y.grad();
    if (a.requires_grad()) {
      auto ga = a.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (a[i] <= b[i]) ga[i] += g[i];
      }
    }
    if (b.requires_grad()) {
      auto gb = b.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(a[i] <= b[i])) gb[i] += g[i];
      }
    }
  });
}

Tensor clamp(Tape& tape, const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must not exceed hi");
  return unary(tape, OpKind::clamp, a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
               [a, lo, hi](const Tensor& y) {
                 auto g = y.grad();
                 auto ga = a.mutable_grad();
                 for (std::size_t i = 0; i < g.size(); ++i) {
                   if (a[i] >= lo && a[i] <= hi) ga[i] += g[i];
                 }
               });
}

Tensor square(Tape& tape, const Tensor& a) {
  return unary(tape, OpKind::square, a, [](double x) { return x * x; }, [a](const Tensor& y) {
    auto g = y.grad();
    auto ga = a.mutable_grad();
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * a[i] * g[i];
  });
}

Tensor reshape(Tape& tape, const Tensor& a, Shape shape) {
  if (numel(shape) != a.size()) {
    throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  }
  auto out = Tensor::from(std::move(shape), std::vector<double>(a.data().begin(), a.data().end()));
  return tape.record(OpKind::reshape, {a}, out, [a](const Tensor& y) { a.accumulate_grad(y.grad()); });
}

std::size_t Conv1dGeometry::output_length(std::size_t input_length, std::size_t kernel) const {
  const auto padded = input_length + pad_left + pad_right;
  if (padded < kernel || stride == 0) return 0;
  return (padded - kernel) / stride + 1;
}

Conv1dGeometry Conv1dGeometry::same(std::size_t input_length, std::size_t kernel, std::size_t stride) {
  const auto out = (input_length + stride - 1) / stride;
  const auto needed = (out - 1) * stride + kernel;
  const auto total = needed > input_length ? needed - input_length : 0;
  return {stride, total / 2, total - total / 2};
}

Conv1dGeometry Conv1dGeometry::valid(std::size_t stride) { return {stride, 0, 0}; }

Tensor conv1d(Tape& tape, const Tensor& x, const Tensor& weight, const Tensor& bias, const Conv1dGeometry& geo) {
  require_rank("conv1d input", x, 3);
  require_rank("conv1d weight", weight, 3);
  require_rank("conv1d bias", bias, 1);
  const auto batch = x.dim(0), c_in = x.dim(1), len = x.dim(2);
  const auto c_out = weight.dim(0), kernel = weight.dim(2);
  if (weight.dim(1) != c_in) shape_mismatch("conv1d", x, weight);
  if (bias.size() != c_out) shape_mismatch("conv1d", weight, bias);
  const auto out_len = geo.output_length(len, kernel);
  if (out_len == 0) {
    throw ShapeError("conv1d: input length " + std::to_string(len) + " too short for kernel " +
                     std::to_string(kernel) + " with stride " + std::to_string(geo.stride));
  }
  const auto rows = batch * out_len;
  const auto cols_n = c_in * kernel;

  // im2col: cols[b * out_len + j, c * kernel + k] = x[b, c, j * stride + k - pad_left]
  auto cols = std::make_shared<std::vector<double>>(rows * cols_n, 0.0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < out_len; ++j) {
      double* row = cols->data() + (b * out_len + j) * cols_n;
      for (std::size_t c = 0; c < c_in; ++c) {
        for (std::size_t k = 0; k < kernel; ++k) {
          const auto pos = static_cast<std::ptrdiff_t>(j * geo.stride + k) - static_cast<std::ptrdiff_t>(geo.pad_left);
          if (pos >= 0 && static_cast<std::size_t>(pos) < len) {
            row[c * kernel + k] = x[(b * c_in + c) * len + static_cast<std::size_t>(pos)];
          }
        }
      }
    }
  }
  RowMatrix prod = ConstMap(cols->data(), rows, cols_n) * ConstMap(weight.data().data(), c_out, cols_n).transpose();
  auto out = Tensor::zeros({batch, c_out, out_len});
  auto o = out.mutable_data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t oc = 0; oc < c_out; ++oc) {
      for (std::size_t j = 0; j < out_len; ++j) o[(b * c_out + oc) * out_len + j] = prod(b * out_len + j, oc) + bias[oc];
    }
  }
  return tape.record(
      OpKind::conv1d, {x, weight, bias}, out,
      [x, weight, bias, cols, geo, batch, c_in, len, c_out, kernel, out_len, rows, cols_n](const Tensor& y) {
        auto g = y.grad();
        RowMatrix grad_rows(rows, c_out);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t oc = 0; oc < c_out; ++oc) {
            for (std::size_t j = 0; j < out_len; ++j) grad_rows(b * out_len + j, oc) = g[(b * c_out + oc) * out_len + j];
          }
        }
        if (weight.requires_grad()) {
          MutMap(weight.mutable_grad().data(), c_out, cols_n).noalias() +=
              grad_rows.transpose() * ConstMap(cols->data(), rows, cols_n);
        }
        if (bias.requires_grad()) {
          auto gb = bias.mutable_grad();
          for (std::size_t oc = 0; oc < c_out; ++oc) gb[oc] += grad_rows.col(static_cast<Eigen::Index>(oc)).sum();
        }
        if (x.requires_grad()) {
          RowMatrix dcols = grad_rows * ConstMap(weight.data().data(), c_out, cols_n);
          auto gx = x.mutable_grad();
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t j = 0; j < out_len; ++j) {
              for (std::size_t c = 0; c < c_in; ++c) {
                for (std::size_t k = 0; k < kernel; ++k) {
                  const auto pos =
                      static_cast<std::ptrdiff_t>(j * geo.stride + k) - static_cast<std::ptrdiff_t>(geo.pad_left);
                  if (pos >= 0 && static_cast<std::size_t>(pos) < len) {
                    gx[(b * c_in + c) * len + static_cast<std::size_t>(pos)] +=
                        dcols(static_cast<Eigen::Index>(b * out_len + j), static_cast<Eigen::Index>(c * kernel + k));
                  }
                }
              }
            }
          }
        }
      });
}

}  // namespace ippo::ad
