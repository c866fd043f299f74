#include "ippo/autodiff/tape.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ippo::ad {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::relu: return "relu";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::softmax: return "softmax";
    case OpKind::log_softmax: return "log_softmax";
    case OpKind::gather: return "gather";
    case OpKind::sum: return "sum";
    case OpKind::sum_last_axis: return "sum_last_axis";
    case OpKind::mean: return "mean";
    case OpKind::minimum: return "minimum";
    case OpKind::clamp: return "clamp";
    case OpKind::square: return "square";
    case OpKind::conv1d: return "conv1d";
    case OpKind::reshape: return "reshape";
  }
  return "unknown";
}

Tensor Tape::record(OpKind kind, std::vector<Tensor> inputs, Tensor output, BackwardFn backward) {
  const std::string where(op_name(kind));
  output.check_finite(where.c_str());
  const bool tracked = std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); });
  if (!tracked) return output;
  output.impl_->requires_grad = true;
  output.impl_->leaf = false;
  records_.push_back(Record{kind, std::move(inputs), output, std::move(backward)});
  return output;
}

void Tape::backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ShapeError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  const auto producer = std::find_if(records_.rbegin(), records_.rend(),
                                     [&](const Record& r) { return r.output.same(loss); });
  if (producer == records_.rend()) {
    throw std::logic_error("backward() on a loss that was not produced by this tape");
  }

  for (auto& r : records_) r.output.clear_grad();
  loss.mutable_grad()[0] = 1.0;

  const auto last = static_cast<std::size_t>(std::distance(producer, records_.rend())) - 1;
  for (std::size_t i = last + 1; i-- > 0;) {
    const Record& r = records_[i];
    if (!r.output.has_grad()) continue;
    r.backward(r.output);
  }
  for (const auto& r : records_) {
    for (const auto& in : r.inputs) {
      if (in.is_leaf() && in.has_grad() && !all_finite(in.grad())) {
        throw NumericalError(std::string("non-finite gradient flowing out of ") + std::string(op_name(r.kind)));
      }
    }
  }
}

}  // namespace ippo::ad
