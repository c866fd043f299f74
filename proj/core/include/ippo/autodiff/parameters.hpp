#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ippo/autodiff/tensor.hpp"
#include "ippo/util/binary_io.hpp"

namespace ippo::ad {

struct NamedTensor {
  std::string name;
  Tensor value;
};

using ParameterList = std::vector<NamedTensor>;

/// L2 norm over all gradients jointly; tensors without a gradient count as zero.
double global_grad_norm(std::span<const Tensor> params);

/// Rescales every gradient by max_norm / norm when the joint norm exceeds
/// max_norm. Returns the norm measured before clipping.
double clip_global_grad_norm(std::span<const Tensor> params, double max_norm);

/// Parameter file, version 1:
///   "IPPOPARM" u32(version) u64(count)
///   per tensor: str(name) u64(rank) u64(dim)... f64s(data)
/// Integers are little-endian; doubles are stored bit-exact.
void write_parameters(io::BinaryWriter& out, const ParameterList& params);
ParameterList read_parameters(io::BinaryReader& in);

void save_parameters(const std::filesystem::path& path, const ParameterList& params);
ParameterList load_parameters(const std::filesystem::path& path);

/// Copies values from `source` into `target`, matching by name and shape.
void assign_parameters(const ParameterList& target, const ParameterList& source);

/// FNV-1a over the raw bit patterns of every value, in order.
std::uint64_t checksum(const ParameterList& params);

}  // namespace ippo::ad
