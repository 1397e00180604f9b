#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <vector>

#include "lfgt/transform.hpp"

namespace lfgt {

inline constexpr int kClassCount = 5;
inline constexpr int kGroupCount = 32;
inline constexpr int kMaxStepLog2 = 10;  // ladder 1, 2, 4, ..., 1024

/// A coefficient slot: spatial band and angular index.
struct Position {
  int band = 0;
  int angular = 0;
  auto operator<=>(const Position&) const = default;
};

/// Number of angular coefficients per band of one super-ray.
using RayLayout = std::vector<int>;

std::vector<RayLayout> layout_of(const CoefficientTensor& tensor);
/// Layout implied by the view sizes of each super-ray, without any bases.
std::vector<RayLayout> layout_of(const std::vector<SuperRayMembers>& members, TransformMode mode);

struct ScanOrder {
  std::vector<Position> order;
  std::vector<double> variance;            // per entry of `order` (0 when unobserved)
  std::vector<std::size_t> observations;   // per entry of `order`
  std::size_t ranked = 0;  // leading entries ordered by variance (>= min_obs observations)
  int min_obs = 1;

  std::size_t size() const { return order.size(); }
  /// Position of `p` in the order, or -1.
  int rank(Position p) const;
  void build_index();

 private:
  std::vector<std::vector<int>> index_;  // [band][angular] -> rank
};

/// Positions observed at least `min_obs` times ranked by decreasing
/// variance, then the rest by (band, angular). Ties by (band, angular).
ScanOrder learn_scan_order(std::span<const CoefficientTensor* const> training, int min_obs);
ScanOrder learn_scan_order(const CoefficientTensor& training, int min_obs);

/// Rebuilds a scan order from its ranked prefix and the layout of the
/// tensor it applies to.
ScanOrder scan_order_from_ranked(const std::vector<Position>& ranked, const std::vector<RayLayout>& layout,
                                 int min_obs);

/// Ranked prefix as indices into the (band, angular)-sorted list of the
/// positions observed in `layout`; the inverse rebuilds the full order.
std::vector<std::uint32_t> scan_order_indices(const ScanOrder& scan, const std::vector<RayLayout>& layout);
ScanOrder scan_order_from_indices(const std::vector<std::uint32_t>& indices,
                                  const std::vector<RayLayout>& layout, int min_obs);

/// One coefficient of a super-ray in scan order.
struct ScanEntry {
  int band = 0;
  int angular = 0;
  int group = 0;  // quantiser group of the position's global scan index
};

/// floor(index * 32 / length).
int quantizer_group(std::size_t scan_index, std::size_t scan_length);
std::vector<ScanEntry> ray_scan(const RayLayout& layout, const ScanOrder& scan);

/// round(n * cls / 4) capped at n - 1, so the first coefficient in scan
/// order is always kept. Class 0 discards nothing.
int discard_count(int n, int cls);

enum class ClassSearch { Descending, Ascending };

struct ClassAssignment {
  std::vector<int> classes;  // per super-ray, 0..4
};

/// Assigns each super-ray the first class in search order whose discarded
/// suffix has mean energy below `threshold`; class 0 otherwise.
ClassAssignment classify_super_rays(const CoefficientTensor& tensor, const ScanOrder& scan,
                                    double threshold, ClassSearch search = ClassSearch::Descending);

struct QuantizerBank {
  std::array<std::array<std::uint8_t, kGroupCount>, kClassCount> log2_step{};

  double step(int cls, int group) const {
    return static_cast<double>(1u << log2_step[static_cast<std::size_t>(cls)][static_cast<std::size_t>(group)]);
  }
};

/// round(c / step), halves away from zero.
std::int64_t quantize_value(double c, double step);

/// Sum of squared error of quantising `values` with `step`.
double quantization_distortion(std::span<const double> values, double step);
/// n * H(q) in bits, H the empirical entropy of the quantised symbols.
double empirical_rate(std::span<const double> values, double step);
/// Ladder step (as log2) minimising D + lambda * R; ties to the smaller step.
int choose_step(std::span<const double> values, double lambda);

/// RD choice per (class, group). `fixed_step_log2 >= 0` forces one step.
QuantizerBank choose_quantizers(const CoefficientTensor& tensor, const ScanOrder& scan,
                                const ClassAssignment& classes, double lambda,
                                int fixed_step_log2 = -1);

/// Symbols of the retained coefficients of every super-ray, in scan order.
struct QuantizedTensor {
  std::vector<std::vector<std::int64_t>> rays;
};

QuantizedTensor quantize(const CoefficientTensor& tensor, const ScanOrder& scan,
                         const ClassAssignment& classes, const QuantizerBank& bank);
/// Discarded coefficients come back as exactly 0.
CoefficientTensor dequantize(const QuantizedTensor& symbols, const std::vector<RayLayout>& layout,
                             const ScanOrder& scan, const ClassAssignment& classes,
                             const QuantizerBank& bank);

std::vector<std::uint8_t> encode_class_flags(const ClassAssignment& classes);
ClassAssignment decode_class_flags(std::span<const std::uint8_t> bytes, int count);

/// Payload of the super-rays of class `cls` (label order). Binarisation:
/// Exp-Golomb(0) magnitude with prefix bins in context (class, group,
/// min(bin, 8)), bypass suffix, bypass sign.
std::vector<std::uint8_t> encode_coefficients(const QuantizedTensor& symbols,
                                              const std::vector<RayLayout>& layout,
                                              const ScanOrder& scan,
                                              const ClassAssignment& classes, int cls);
/// Fills symbols.rays[k] for every super-ray of class `cls`.
void decode_coefficients(std::span<const std::uint8_t> bytes, const std::vector<RayLayout>& layout,
                         const ScanOrder& scan, const ClassAssignment& classes, int cls,
                         QuantizedTensor& symbols);

}  // namespace lfgt
