#pragma once

#include <cstdint>
#include <vector>

#include "ippo/autodiff/tensor.hpp"
#include "ippo/util/binary_io.hpp"

namespace ippo::ad {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
};

/// Adaptive moment estimation. Gradients are never cleared implicitly; call
/// zero_grad() before accumulating the next step's gradients.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamOptions options);

  void step();
  void zero_grad();

  double lr() const { return options_.lr; }
  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }
  std::int64_t steps() const { return steps_; }

  void write_state(io::BinaryWriter& out) const;
  void read_state(io::BinaryReader& in);

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  AdamOptions options_;
  std::int64_t steps_ = 0;
};

}  // namespace ippo::ad
