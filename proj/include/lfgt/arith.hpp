#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lfgt {

/// Adaptive probability of a zero bit, 11-bit precision.
struct BitModel {
  static constexpr int kBits = 11;
  static constexpr int kOne = 1 << kBits;
  static constexpr int kShift = 5;
  std::uint16_t p0 = kOne / 2;
};

/// Binary range coder (carry-propagating, byte-oriented).
class RangeEncoder {
 public:
  void encode(BitModel& model, int bit);
  void encode_bypass(int bit);
  /// Most significant bit first.
  void encode_bits(std::uint32_t value, int count);
  /// Flushes and returns the payload. The encoder must not be reused.
  std::vector<std::uint8_t> finish();

 private:
  void normalize();
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  /// `what` names the payload in error messages.
  RangeDecoder(std::span<const std::uint8_t> data, std::string what);

  int decode(BitModel& model);
  int decode_bypass();
  std::uint32_t decode_bits(int count);
  /// Throws unless the payload was consumed exactly.
  void finish() const;

 private:
  void normalize();
  std::uint8_t next();
  [[noreturn]] void corrupt() const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
  std::string what_;
};

/// Exp-Golomb order 0 with context-coded prefix bins: prefix bin i uses
/// models[min(i, models.size() - 1)], suffix bits are bypass.
void encode_eg0(RangeEncoder& enc, std::uint32_t value, std::span<BitModel> models);
std::uint32_t decode_eg0(RangeDecoder& dec, std::span<BitModel> models);

/// Signed value as EG0 magnitude followed by a context-coded sign.
struct SignedModels {
  BitModel prefix[9];
  BitModel sign;
};
void encode_signed(RangeEncoder& enc, std::int64_t value, SignedModels& models);
std::int64_t decode_signed(RangeDecoder& dec, SignedModels& models);

}  // namespace lfgt
