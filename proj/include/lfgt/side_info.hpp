#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lfgt/segmentation.hpp"

namespace lfgt {

/// Crack-edge contours of a super-pixel map, split into chains and coded as
/// differential chain codes. The map is canonicalised first, so decoding
/// reproduces canonicalize_labels(map) exactly. Every label must be one
/// 4-connected region.
std::vector<std::uint8_t> encode_segmentation(const SuperPixelMap& map);
SuperPixelMap decode_segmentation(std::span<const std::uint8_t> bytes, int rows, int cols);

/// One chain of the contour decomposition (exposed for tests).
struct ContourChain {
  int start_row = 0;  // corner lattice, (rows + 1) x (cols + 1)
  int start_col = 0;
  int direction = 0;  // 0 = E, 1 = S, 2 = W, 3 = N
  std::vector<int> moves;  // 0 = straight, 1 = left, 2 = right; one per edge after the first
  int length() const { return static_cast<int>(moves.size()) + 1; }
};
std::vector<ContourChain> trace_contours(const LabelMap& labels);

inline constexpr double kDisparityStep = 1.0 / 8.0;

/// Rounds to the 1/8-pixel grid (half away from zero).
std::int64_t quantize_disparity(double d);
double dequantize_disparity(std::int64_t q);

/// Disparities quantised to 1/8 pixel, delta-coded in label order.
std::vector<std::uint8_t> encode_disparities(const std::vector<double>& values);
std::vector<double> decode_disparities(std::span<const std::uint8_t> bytes, int count);

}  // namespace lfgt
