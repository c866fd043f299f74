#include "ippo/autodiff/parameters.hpp"

#include <bit>
#include <cmath>
#include <fstream>

namespace ippo::ad {

namespace {
constexpr char kParamMagic[9] = "IPPOPARM";
constexpr std::uint32_t kParamVersion = 1;
}  // namespace

double global_grad_norm(std::span<const Tensor> params) {
  double total = 0.0;
  for (const auto& p : params) {
    for (double g : p.grad()) {
      if (!std::isfinite(g)) throw NumericalError("non-finite gradient in global norm");
      total += g * g;
    }
  }
  return std::sqrt(total);
}

double clip_global_grad_norm(std::span<const Tensor> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (const auto& p : params) {
      if (!p.has_grad()) continue;
      for (auto& g : p.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

void write_parameters(io::BinaryWriter& out, const ParameterList& params) {
  out.magic(kParamMagic);
  out.u32(kParamVersion);
  out.u64(params.size());
  for (const auto& [name, value] : params) {
    out.str(name);
    out.u64(value.rank());
    for (auto d : value.shape()) out.u64(d);
    out.f64s(value.data());
  }
}

ParameterList read_parameters(io::BinaryReader& in) {
  in.expect_magic(kParamMagic);
  const auto version = in.u32();
  if (version != kParamVersion) {
    throw io::FormatError("unsupported parameter file version " + std::to_string(version));
  }
  const auto count = in.u64();
  ParameterList params;
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = in.str();
    const auto rank = in.u64();
    if (rank > 8) throw io::FormatError("tensor rank out of range for " + name);
    Shape shape(rank);
    for (auto& d : shape) d = in.u64();
    auto data = in.f64s();
    if (numel(shape) != data.size()) throw io::FormatError("shape/data mismatch for " + name);
    params.push_back({std::move(name), Tensor::from(std::move(shape), std::move(data), true)});
  }
  return params;
}

void save_parameters(const std::filesystem::path& path, const ParameterList& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::BinaryWriter w(os);
  write_parameters(w, params);
  w.check();
}

ParameterList load_parameters(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  io::BinaryReader r(is);
  return read_parameters(r);
}

void assign_parameters(const ParameterList& target, const ParameterList& source) {
  if (target.size() != source.size()) {
    throw ShapeError("parameter count mismatch: " + std::to_string(target.size()) + " vs " +
                     std::to_string(source.size()));
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto& t = target[i];
    const auto& s = source[i];
    if (t.name != s.name || t.value.shape() != s.value.shape()) {
      throw ShapeError("parameter mismatch at " + t.name + " " + to_string(t.value.shape()) + " vs " + s.name + " " +
                       to_string(s.value.shape()));
    }
    auto dst = t.value.mutable_data();
    auto src = s.value.data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

std::uint64_t checksum(const ParameterList& params) {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : params) {
    for (double v : p.value.data()) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
  }
  return h;
}

}  // namespace ippo::ad
