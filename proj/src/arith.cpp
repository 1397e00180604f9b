#include "lfgt/arith.hpp"

#include <algorithm>

#include "lfgt/light_field.hpp"

namespace lfgt {
namespace {

constexpr std::uint32_t kTop = 1u << 24;
constexpr int kMaxPrefix = 32;

}  // namespace

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t temp = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(temp + carry));
      temp = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::normalize() {
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode(BitModel& model, int bit) {
  const std::uint32_t bound = (range_ >> BitModel::kBits) * model.p0;
  if (bit == 0) {
    range_ = bound;
    model.p0 = static_cast<std::uint16_t>(model.p0 + ((BitModel::kOne - model.p0) >> BitModel::kShift));
  } else {
    low_ += bound;
    range_ -= bound;
    model.p0 = static_cast<std::uint16_t>(model.p0 - (model.p0 >> BitModel::kShift));
  }
  normalize();
}

void RangeEncoder::encode_bypass(int bit) {
  range_ >>= 1;
  if (bit) low_ += range_;
  normalize();
}

void RangeEncoder::encode_bits(std::uint32_t value, int count) {
  for (int i = count - 1; i >= 0; --i) encode_bypass(static_cast<int>((value >> i) & 1u));
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> data, std::string what)
    : data_(data), what_(std::move(what)) {
  if (data_.size() < 5) throw FormatError("truncated " + what_ + " payload");
  if (data_[0] != 0) corrupt();
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next();
  if (code_ == 0xFFFFFFFFu) corrupt();
}

void RangeDecoder::corrupt() const { throw FormatError("corrupt " + what_ + " payload"); }

std::uint8_t RangeDecoder::next() {
  if (pos_ >= data_.size()) throw FormatError("truncated " + what_ + " payload");
  return data_[pos_++];
}

void RangeDecoder::normalize() {
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next();
  }
  if (code_ >= range_) corrupt();
}

int RangeDecoder::decode(BitModel& model) {
  const std::uint32_t bound = (range_ >> BitModel::kBits) * model.p0;
  int bit;
  if (code_ < bound) {
    range_ = bound;
    model.p0 = static_cast<std::uint16_t>(model.p0 + ((BitModel::kOne - model.p0) >> BitModel::kShift));
    bit = 0;
  } else {
    code_ -= bound;
    range_ -= bound;
    model.p0 = static_cast<std::uint16_t>(model.p0 - (model.p0 >> BitModel::kShift));
    bit = 1;
  }
  normalize();
  return bit;
}

int RangeDecoder::decode_bypass() {
  range_ >>= 1;
  int bit = 0;
  if (code_ >= range_) {
    code_ -= range_;
    bit = 1;
  }
  normalize();
  return bit;
}

std::uint32_t RangeDecoder::decode_bits(int count) {
  std::uint32_t v = 0;
  for (int i = 0; i < count; ++i) v = (v << 1) | static_cast<std::uint32_t>(decode_bypass());
  return v;
}

void RangeDecoder::finish() const {
  if (pos_ != data_.size()) corrupt();
}

void encode_eg0(RangeEncoder& enc, std::uint32_t value, std::span<BitModel> models) {
  const std::uint64_t v = static_cast<std::uint64_t>(value) + 1;
  int k = 0;
  while ((v >> (k + 1)) != 0) ++k;
  const std::size_t last = models.size() - 1;
  for (int i = 0; i < k; ++i) enc.encode(models[std::min<std::size_t>(i, last)], 1);
  if (k < kMaxPrefix) enc.encode(models[std::min<std::size_t>(k, last)], 0);
  for (int i = k - 1; i >= 0; --i) enc.encode_bypass(static_cast<int>((v >> i) & 1u));
}

std::uint32_t decode_eg0(RangeDecoder& dec, std::span<BitModel> models) {
  const std::size_t last = models.size() - 1;
  int k = 0;
  while (k < kMaxPrefix && dec.decode(models[std::min<std::size_t>(k, last)]) == 1) ++k;
  std::uint64_t v = 1;
  for (int i = 0; i < k; ++i) v = (v << 1) | static_cast<std::uint64_t>(dec.decode_bypass());
  if (v - 1 > 0xFFFFFFFFull) throw FormatError("Exp-Golomb value out of range");
  return static_cast<std::uint32_t>(v - 1);
}

void encode_signed(RangeEncoder& enc, std::int64_t value, SignedModels& models) {
  const std::uint64_t mag = value < 0 ? static_cast<std::uint64_t>(-value) : static_cast<std::uint64_t>(value);
  if (mag > 0xFFFFFFFEull) throw Error("value too large for entropy coding");
  encode_eg0(enc, static_cast<std::uint32_t>(mag), models.prefix);
  if (mag != 0) enc.encode(models.sign, value < 0 ? 1 : 0);
}

std::int64_t decode_signed(RangeDecoder& dec, SignedModels& models) {
  const std::int64_t mag = decode_eg0(dec, models.prefix);
  if (mag == 0) return 0;
  return dec.decode(models.sign) ? -mag : mag;
}

}  // namespace lfgt
