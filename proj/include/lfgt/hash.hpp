#pragma once

#include <bit>
#include <cstdint>
#include <span>

namespace lfgt {

/// 64-bit FNV-1a, used for golden hashes of intermediate artifacts.
class Fnv1a {
 public:
  void bytes(std::span<const std::uint8_t> data) {
    for (std::uint8_t b : data) {
      state_ ^= b;
      state_ *= 0x100000001b3ull;
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<std::uint8_t>(v >> (8 * i));
      state_ *= 0x100000001b3ull;
    }
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  template <typename Range>
  void doubles(const Range& values) {
    for (double v : values) f64(v);
  }

  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

}  // namespace lfgt
