#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ippo::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Little-endian binary writer; doubles are stored as their IEEE-754 bit pattern.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& os) : os_(os) {}

  void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) u8(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void f64s(std::span<const double> values) {
    u64(values.size());
    for (double v : values) f64(v);
  }
  void magic(const char (&tag)[9]) { os_.write(tag, 8); }

  void check() const {
    if (!os_) throw FormatError("write failed");
  }

 private:
  std::ostream& os_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& is) : is_(is) {}

  std::uint8_t u8() {
    const int c = is_.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("unexpected end of file");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t max_len = 1u << 24) {
    const auto n = u64();
    if (n > max_len) throw FormatError("string length out of range");
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) throw FormatError("unexpected end of file");
    return s;
  }
  std::vector<double> f64s(std::size_t max_len = 1u << 28) {
    const auto n = u64();
    if (n > max_len) throw FormatError("array length out of range");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }
  void expect_magic(const char (&tag)[9]) {
    char buf[8];
    is_.read(buf, 8);
    if (!is_ || std::string(buf, 8) != std::string(tag, 8)) {
      throw FormatError(std::string("bad file magic, expected ") + tag);
    }
  }

 private:
  std::istream& is_;
};

}  // namespace ippo::io
