#include "lfgt/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>

#include "lfgt/arith.hpp"

namespace lfgt {

std::vector<RayLayout> layout_of(const CoefficientTensor& tensor) {
  std::vector<RayLayout> out(tensor.rays.size());
  for (std::size_t k = 0; k < tensor.rays.size(); ++k)
    for (const auto& band : tensor.rays[k]) out[k].push_back(static_cast<int>(band.size()));
  return out;
}

std::vector<RayLayout> layout_of(const std::vector<SuperRayMembers>& members, TransformMode mode) {
  std::vector<RayLayout> out(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    if (mode == TransformMode::NonSeparable) {
      out[k].assign(members[k].total_size(), 1);
      continue;
    }
    std::size_t bands = 0;
    for (const auto& vp : members[k].views) bands = std::max(bands, vp.pixels.size());
    out[k].assign(bands, 0);
    for (const auto& vp : members[k].views)
      for (std::size_t b = 0; b < vp.pixels.size(); ++b) ++out[k][b];
  }
  return out;
}

void ScanOrder::build_index() {
  index_.clear();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Position p = order[i];
    if (static_cast<std::size_t>(p.band) >= index_.size()) index_.resize(static_cast<std::size_t>(p.band) + 1);
    auto& row = index_[static_cast<std::size_t>(p.band)];
    if (static_cast<std::size_t>(p.angular) >= row.size()) row.resize(static_cast<std::size_t>(p.angular) + 1, -1);
    row[static_cast<std::size_t>(p.angular)] = static_cast<int>(i);
  }
}

int ScanOrder::rank(Position p) const {
  if (p.band < 0 || static_cast<std::size_t>(p.band) >= index_.size()) return -1;
  const auto& row = index_[static_cast<std::size_t>(p.band)];
  if (p.angular < 0 || static_cast<std::size_t>(p.angular) >= row.size()) return -1;
  return row[static_cast<std::size_t>(p.angular)];
}

namespace {

// Observation counts per position of a layout, indexed [band][angular].
std::vector<std::vector<std::size_t>> observation_counts(const std::vector<RayLayout>& layout) {
  std::vector<std::vector<std::size_t>> counts;
  for (const auto& ray : layout) {
    if (ray.size() > counts.size()) counts.resize(ray.size());
    for (std::size_t b = 0; b < ray.size(); ++b) {
      auto& row = counts[b];
      if (static_cast<std::size_t>(ray[b]) > row.size()) row.resize(static_cast<std::size_t>(ray[b]), 0);
      for (int a = 0; a < ray[b]; ++a) ++row[static_cast<std::size_t>(a)];
    }
  }
  return counts;
}

std::vector<Position> observed_positions(const std::vector<std::vector<std::size_t>>& counts) {
  std::vector<Position> out;
  for (std::size_t b = 0; b < counts.size(); ++b)
    for (std::size_t a = 0; a < counts[b].size(); ++a)
      if (counts[b][a] > 0) out.push_back({static_cast<int>(b), static_cast<int>(a)});
  return out;
}

}  // namespace

ScanOrder learn_scan_order(std::span<const CoefficientTensor* const> training, int min_obs) {
  if (training.empty()) throw Error("scan order needs at least one training tensor");
  if (min_obs < 1) throw Error("min_obs must be at least 1");
  struct Acc {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
  };
  std::vector<std::vector<Acc>> acc;
  for (const CoefficientTensor* t : training)
    for (const auto& ray : t->rays) {
      if (ray.size() > acc.size()) acc.resize(ray.size());
      for (std::size_t b = 0; b < ray.size(); ++b) {
        auto& row = acc[b];
        if (ray[b].size() > row.size()) row.resize(ray[b].size());
        for (std::size_t a = 0; a < ray[b].size(); ++a) {
          Acc& s = row[a];
          ++s.n;
          const double delta = ray[b][a] - s.mean;
          s.mean += delta / static_cast<double>(s.n);
          s.m2 += delta * (ray[b][a] - s.mean);
        }
      }
    }

  struct Entry {
    Position p;
    double variance;
    std::size_t n;
  };
  std::vector<Entry> ranked, rest;
  for (std::size_t b = 0; b < acc.size(); ++b)
    for (std::size_t a = 0; a < acc[b].size(); ++a) {
      const Acc& s = acc[b][a];
      if (s.n == 0) continue;
      Entry e{{static_cast<int>(b), static_cast<int>(a)}, s.m2 / static_cast<double>(s.n), s.n};
      (s.n >= static_cast<std::size_t>(min_obs) ? ranked : rest).push_back(e);
    }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Entry& x, const Entry& y) { return x.variance > y.variance; });

  ScanOrder scan;
  scan.min_obs = min_obs;
  scan.ranked = ranked.size();
  for (const auto* list : {&ranked, &rest})
    for (const Entry& e : *list) {
      scan.order.push_back(e.p);
      scan.variance.push_back(e.variance);
      scan.observations.push_back(e.n);
    }
  scan.build_index();
  return scan;
}

ScanOrder learn_scan_order(const CoefficientTensor& training, int min_obs) {
  const CoefficientTensor* one[] = {&training};
  return learn_scan_order(std::span<const CoefficientTensor* const>(one), min_obs);
}

ScanOrder scan_order_from_ranked(const std::vector<Position>& ranked, const std::vector<RayLayout>& layout,
                                 int min_obs) {
  const auto counts = observation_counts(layout);
  auto count_of = [&](Position p) -> std::size_t {
    if (p.band < 0 || static_cast<std::size_t>(p.band) >= counts.size()) return 0;
    const auto& row = counts[static_cast<std::size_t>(p.band)];
    if (p.angular < 0 || static_cast<std::size_t>(p.angular) >= row.size()) return 0;
    return row[static_cast<std::size_t>(p.angular)];
  };
  ScanOrder scan;
  scan.min_obs = min_obs;
  scan.ranked = ranked.size();
  for (Position p : ranked) {
    if (count_of(p) == 0) throw FormatError("scan order names an unobserved position");
    scan.order.push_back(p);
  }
  scan.build_index();
  for (Position p : observed_positions(counts))
    if (scan.rank(p) < 0) scan.order.push_back(p);
  for (Position p : scan.order) scan.observations.push_back(count_of(p));
  scan.variance.assign(scan.order.size(), 0.0);
  scan.build_index();
  return scan;
}

std::vector<std::uint32_t> scan_order_indices(const ScanOrder& scan, const std::vector<RayLayout>& layout) {
  const auto observed = observed_positions(observation_counts(layout));
  std::vector<std::uint32_t> out;
  out.reserve(scan.ranked);
  for (std::size_t i = 0; i < scan.ranked; ++i) {
    const auto it = std::lower_bound(observed.begin(), observed.end(), scan.order[i]);
    if (it == observed.end() || *it != scan.order[i]) throw Error("scan order position absent from the tensor");
    out.push_back(static_cast<std::uint32_t>(it - observed.begin()));
  }
  return out;
}

ScanOrder scan_order_from_indices(const std::vector<std::uint32_t>& indices,
                                  const std::vector<RayLayout>& layout, int min_obs) {
  const auto observed = observed_positions(observation_counts(layout));
  std::vector<std::uint8_t> seen(observed.size(), 0);
  std::vector<Position> ranked;
  ranked.reserve(indices.size());
  for (std::uint32_t idx : indices) {
    if (idx >= observed.size() || seen[idx]) throw FormatError("corrupt scan order");
    seen[idx] = 1;
    ranked.push_back(observed[idx]);
  }
  return scan_order_from_ranked(ranked, layout, min_obs);
}

int quantizer_group(std::size_t scan_index, std::size_t scan_length) {
  if (scan_length == 0) return 0;
  return static_cast<int>(scan_index * kGroupCount / scan_length);
}

std::vector<ScanEntry> ray_scan(const RayLayout& layout, const ScanOrder& scan) {
  std::vector<std::pair<int, Position>> ranked;
  for (std::size_t b = 0; b < layout.size(); ++b)
    for (int a = 0; a < layout[b]; ++a) {
      const Position p{static_cast<int>(b), a};
      const int r = scan.rank(p);
      if (r < 0) throw Error("scan order does not cover every coefficient position");
      ranked.emplace_back(r, p);
    }
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<ScanEntry> out;
  out.reserve(ranked.size());
  for (const auto& [r, p] : ranked)
    out.push_back({p.band, p.angular, quantizer_group(static_cast<std::size_t>(r), scan.size())});
  return out;
}

int discard_count(int n, int cls) {
  if (cls <= 0 || n <= 1) return 0;
  const int d = static_cast<int>(std::lround(static_cast<double>(n) * cls / 4.0));
  return std::min(d, n - 1);
}

ClassAssignment classify_super_rays(const CoefficientTensor& tensor, const ScanOrder& scan,
                                    double threshold, ClassSearch search) {
  ClassAssignment out;
  out.classes.assign(tensor.rays.size(), 0);
  const std::vector<int> order = search == ClassSearch::Descending ? std::vector<int>{4, 3, 2, 1}
                                                                   : std::vector<int>{1, 2, 3, 4};
  for (std::size_t k = 0; k < tensor.rays.size(); ++k) {
    const auto& ray = tensor.rays[k];
    RayLayout layout;
    for (const auto& band : ray) layout.push_back(static_cast<int>(band.size()));
    const auto entries = ray_scan(layout, scan);
    const int n = static_cast<int>(entries.size());
    // suffix[j] = energy of entries j..n-1
    std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
    for (int j = n - 1; j >= 0; --j) {
      const double c = ray[static_cast<std::size_t>(entries[static_cast<std::size_t>(j)].band)]
                          [static_cast<std::size_t>(entries[static_cast<std::size_t>(j)].angular)];
      suffix[static_cast<std::size_t>(j)] = suffix[static_cast<std::size_t>(j) + 1] + c * c;
    }
    for (int cls : order) {
      const int d = discard_count(n, cls);
      if (d == 0) continue;
      if (suffix[static_cast<std::size_t>(n - d)] / d < threshold) {
        out.classes[k] = cls;
        break;
      }
    }
  }
  return out;
}

std::int64_t quantize_value(double c, double step) {
  if (!(step > 0)) throw Error("quantiser step must be positive");
  const double q = std::round(c / step);
  if (!(std::abs(q) < 4.0e9)) throw Error("coefficient too large to quantise");
  return static_cast<std::int64_t>(q);
}

double quantization_distortion(std::span<const double> values, double step) {
  double d = 0.0;
  for (double c : values) {
    const double e = c - static_cast<double>(quantize_value(c, step)) * step;
    d += e * e;
  }
  return d;
}

double empirical_rate(std::span<const double> values, double step) {
  if (values.empty()) return 0.0;
  std::unordered_map<std::int64_t, std::size_t> counts;
  for (double c : values) ++counts[quantize_value(c, step)];
  const double n = static_cast<double>(values.size());
  double bits = 0.0;
  for (const auto& [q, m] : counts) {
    (void)q;
    bits -= static_cast<double>(m) * std::log2(static_cast<double>(m) / n);
  }
  return bits;
}

int choose_step(std::span<const double> values, double lambda) {
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= kMaxStepLog2; ++s) {
    const double step = static_cast<double>(1 << s);
    const double cost = quantization_distortion(values, step) + lambda * empirical_rate(values, step);
    if (cost < best_cost) {
      best_cost = cost;
      best = s;
    }
  }
  return best;
}

QuantizerBank choose_quantizers(const CoefficientTensor& tensor, const ScanOrder& scan,
                                const ClassAssignment& classes, double lambda, int fixed_step_log2) {
  if (!(lambda > 0)) throw Error("lambda must be positive");
  if (fixed_step_log2 > kMaxStepLog2) throw Error("fixed step exceeds the quantiser ladder");
  QuantizerBank bank;
  if (fixed_step_log2 >= 0) {
    for (auto& row : bank.log2_step) row.fill(static_cast<std::uint8_t>(fixed_step_log2));
    return bank;
  }
  std::vector<std::vector<double>> buckets(static_cast<std::size_t>(kClassCount * kGroupCount));
  for (std::size_t k = 0; k < tensor.rays.size(); ++k) {
    const auto& ray = tensor.rays[k];
    RayLayout layout;
    for (const auto& band : ray) layout.push_back(static_cast<int>(band.size()));
    const auto entries = ray_scan(layout, scan);
    const int cls = classes.classes[k];
    const int keep = static_cast<int>(entries.size()) - discard_count(static_cast<int>(entries.size()), cls);
    for (int j = 0; j < keep; ++j) {
      const auto& e = entries[static_cast<std::size_t>(j)];
      buckets[static_cast<std::size_t>(cls * kGroupCount + e.group)].push_back(
          ray[static_cast<std::size_t>(e.band)][static_cast<std::size_t>(e.angular)]);
    }
  }
  for (int cls = 0; cls < kClassCount; ++cls)
    for (int g = 0; g < kGroupCount; ++g)
      bank.log2_step[static_cast<std::size_t>(cls)][static_cast<std::size_t>(g)] = static_cast<std::uint8_t>(
          choose_step(buckets[static_cast<std::size_t>(cls * kGroupCount + g)], lambda));
  return bank;
}

QuantizedTensor quantize(const CoefficientTensor& tensor, const ScanOrder& scan,
                         const ClassAssignment& classes, const QuantizerBank& bank) {
  if (classes.classes.size() != tensor.rays.size()) throw Error("class assignment does not match tensor");
  QuantizedTensor out;
  out.rays.resize(tensor.rays.size());
  for (std::size_t k = 0; k < tensor.rays.size(); ++k) {
    const auto& ray = tensor.rays[k];
    RayLayout layout;
    for (const auto& band : ray) layout.push_back(static_cast<int>(band.size()));
    const auto entries = ray_scan(layout, scan);
    const int cls = classes.classes[k];
    const int keep = static_cast<int>(entries.size()) - discard_count(static_cast<int>(entries.size()), cls);
    out.rays[k].reserve(static_cast<std::size_t>(keep));
    for (int j = 0; j < keep; ++j) {
      const auto& e = entries[static_cast<std::size_t>(j)];
      out.rays[k].push_back(quantize_value(ray[static_cast<std::size_t>(e.band)][static_cast<std::size_t>(e.angular)],
                                           bank.step(cls, e.group)));
    }
  }
  return out;
}

CoefficientTensor dequantize(const QuantizedTensor& symbols, const std::vector<RayLayout>& layout,
                             const ScanOrder& scan, const ClassAssignment& classes,
                             const QuantizerBank& bank) {
  if (symbols.rays.size() != layout.size() || classes.classes.size() != layout.size())
    throw Error("symbols, layout and classes disagree on the super-ray count");
  CoefficientTensor out;
  out.rays.resize(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    auto& ray = out.rays[k];
    for (int n : layout[k]) ray.emplace_back(static_cast<std::size_t>(n), 0.0);
    const auto entries = ray_scan(layout[k], scan);
    const int cls = classes.classes[k];
    const std::size_t keep = entries.size() - static_cast<std::size_t>(discard_count(static_cast<int>(entries.size()), cls));
    if (symbols.rays[k].size() != keep) throw Error("symbol count does not match the class cut");
    for (std::size_t j = 0; j < keep; ++j) {
      const auto& e = entries[j];
      ray[static_cast<std::size_t>(e.band)][static_cast<std::size_t>(e.angular)] =
          static_cast<double>(symbols.rays[k][j]) * bank.step(cls, e.group);
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_class_flags(const ClassAssignment& classes) {
  RangeEncoder enc;
  BitModel models[kClassCount - 1];
  for (int cls : classes.classes) {
    if (cls < 0 || cls >= kClassCount) throw Error("class id out of range");
    for (int j = 0; j < kClassCount - 1; ++j) {
      enc.encode(models[j], cls > j ? 1 : 0);
      if (cls <= j) break;
    }
  }
  return enc.finish();
}

ClassAssignment decode_class_flags(std::span<const std::uint8_t> bytes, int count) {
  RangeDecoder dec(bytes, "class flag");
  BitModel models[kClassCount - 1];
  ClassAssignment out;
  out.classes.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    int cls = 0;
    while (cls < kClassCount - 1 && dec.decode(models[cls])) ++cls;
    out.classes.push_back(cls);
  }
  dec.finish();
  return out;
}

namespace {

struct CoefficientModels {
  BitModel prefix[kGroupCount][9];
};

}  // namespace

std::vector<std::uint8_t> encode_coefficients(const QuantizedTensor& symbols,
                                              const std::vector<RayLayout>& layout,
                                              const ScanOrder& scan,
                                              const ClassAssignment& classes, int cls) {
  RangeEncoder enc;
  auto models = std::make_unique<CoefficientModels>();
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (classes.classes[k] != cls) continue;
    const auto entries = ray_scan(layout[k], scan);
    const auto& q = symbols.rays[k];
    for (std::size_t j = 0; j < q.size(); ++j) {
      const std::int64_t v = q[j];
      const std::uint64_t mag = v < 0 ? static_cast<std::uint64_t>(-v) : static_cast<std::uint64_t>(v);
      encode_eg0(enc, static_cast<std::uint32_t>(mag), models->prefix[entries[j].group]);
      if (mag != 0) enc.encode_bypass(v < 0 ? 1 : 0);
    }
  }
  return enc.finish();
}

void decode_coefficients(std::span<const std::uint8_t> bytes, const std::vector<RayLayout>& layout,
                         const ScanOrder& scan, const ClassAssignment& classes, int cls,
                         QuantizedTensor& symbols) {
  RangeDecoder dec(bytes, "class " + std::to_string(cls) + " coefficient");
  auto models = std::make_unique<CoefficientModels>();
  symbols.rays.resize(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (classes.classes[k] != cls) continue;
    const auto entries = ray_scan(layout[k], scan);
    const std::size_t keep = entries.size() - static_cast<std::size_t>(discard_count(static_cast<int>(entries.size()), cls));
    auto& q = symbols.rays[k];
    q.assign(keep, 0);
    for (std::size_t j = 0; j < keep; ++j) {
      const std::int64_t mag = decode_eg0(dec, models->prefix[entries[j].group]);
      q[j] = (mag != 0 && dec.decode_bypass()) ? -mag : mag;
    }
  }
  dec.finish();
}

}  // namespace lfgt
