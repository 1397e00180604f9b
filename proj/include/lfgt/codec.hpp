#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lfgt/coefficients.hpp"
#include "lfgt/transform.hpp"

namespace lfgt {

inline constexpr std::uint8_t kBitstreamVersion = 1;

struct CodecConfig {
  TransformMode mode = TransformMode::SeparableOptimized;
  int superpixels = 64;
  double compactness = 10.0;
  double alpha = 1.0;
  int block_size = 10;
  int max_iterations = 200;
  double lambda = 20.0;
  double class_threshold = 1.0;
  ClassSearch class_search = ClassSearch::Descending;
  int min_obs = 10;
  int fixed_step_log2 = -1;  // -1: RD choice per group
  int threads = 0;
  bool local_decode = true;  // run the decoder on the produced stream for stats

  void validate() const;
};

/// Decode-relevant parameters, stored at the start of the stream.
struct BitstreamHeader {
  std::uint8_t version = kBitstreamVersion;
  std::uint16_t n_u = 0;
  std::uint16_t n_v = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t superpixels = 0;
  TransformMode mode = TransformMode::SeparableOptimized;
  float alpha = 1.0f;
  std::uint16_t block_size = 10;
  std::uint16_t max_iterations = 200;
  std::uint16_t min_obs = 10;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<std::uint32_t> scan_indices;  // see scan_order_indices
  QuantizerBank quantizers;
  std::vector<std::uint8_t> segmentation;
  std::vector<std::uint8_t> disparity;
  std::vector<std::uint8_t> class_flags;
  std::array<std::vector<std::uint8_t>, kClassCount> coefficients;

  std::vector<std::uint8_t> serialize() const;
  /// Parses one stream from the front of `data`; `consumed` receives its
  /// length. Errors name the section that failed.
  static Bitstream parse(std::span<const std::uint8_t> data, std::size_t* consumed = nullptr);
};

/// Bytes per part, for the rate split. Header, scan order, quantiser table
/// and class flags count towards the coefficients.
struct RateSplit {
  std::size_t segmentation = 0;
  std::size_t disparity = 0;
  std::size_t coefficients = 0;
  std::size_t total() const { return segmentation + disparity + coefficients; }
};
RateSplit rate_split(const Bitstream& stream);

struct EncodeStats {
  std::size_t bytes = 0;
  double bpp = 0.0;
  double psnr = 0.0;         // real-valued reconstruction
  double psnr_8bit = 0.0;    // rounded and clamped reconstruction
  bool lossless = false;     // 8-bit reconstruction equals the input
  RateSplit split;
  int superpixels = 0;
  double cons_percent = 0.0;
  std::array<int, kClassCount> class_histogram{};
  std::size_t max_vertices = 0;
  std::size_t coupled_views = 0;
  std::size_t reused_views = 0;
  std::size_t optimized_blocks = 0;
  std::size_t increased_blocks = 0;
  double seconds_segmentation = 0.0;
  double seconds_transform = 0.0;
  double seconds_coding = 0.0;
  double seconds_decode = 0.0;
};

/// FNV-1a hashes of intermediate artifacts, equal on both sides of the codec.
using ArtifactHashes = std::map<std::string, std::uint64_t>;

struct EncodeResult {
  std::vector<std::uint8_t> bytes;
  EncodeStats stats;
  ArtifactHashes hashes;
  CoefficientTensor coefficients;  // before quantisation
  CoefficientTensor dequantized;
  std::optional<LightField> decoded;  // present with local_decode
};

/// `disparity` describes view (0,0).
EncodeResult encode_light_field(const LightField& lf, const DisparityMap& disparity,
                                const CodecConfig& config);

struct DecodeResult {
  LightField light_field;
  SuperRaySegmentation segmentation;
  ArtifactHashes hashes;
  std::size_t consumed = 0;
};

DecodeResult decode_light_field(std::span<const std::uint8_t> bytes, int threads = 0);

/// FNV-1a of the samples of a light field.
std::uint64_t hash_light_field(const LightField& lf);

}  // namespace lfgt
