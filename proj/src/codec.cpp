#include "lfgt/codec.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "lfgt/bytes.hpp"
#include "lfgt/hash.hpp"
#include "lfgt/side_info.hpp"

namespace lfgt {
namespace {

constexpr std::uint8_t kMagic[4] = {'L', 'F', 'G', 'T'};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::uint64_t hash_segmentation(const SuperRaySegmentation& seg) {
  Fnv1a h;
  h.i64(seg.n_u);
  h.i64(seg.n_v);
  h.i64(seg.count);
  for (const auto& view : seg.views)
    for (int i = 0; i < view.rows() * view.cols(); ++i) h.i64(view[static_cast<std::size_t>(i)]);
  h.doubles(seg.median_disparity);
  return h.value();
}

std::uint64_t hash_scan(const ScanOrder& scan) {
  Fnv1a h;
  h.u64(scan.ranked);
  for (Position p : scan.order) {
    h.i64(p.band);
    h.i64(p.angular);
  }
  return h.value();
}

std::uint64_t hash_tensor(const CoefficientTensor& t) {
  Fnv1a h;
  for (const auto& ray : t.rays)
    for (const auto& band : ray) {
      h.u64(band.size());
      h.doubles(band);
    }
  return h.value();
}

std::uint64_t hash_classes(const ClassAssignment& classes, const QuantizerBank& bank) {
  Fnv1a h;
  for (int c : classes.classes) h.i64(c);
  for (const auto& row : bank.log2_step) h.bytes(row);
  return h.value();
}

TransformOptions transform_options(const BitstreamHeader& header, int threads) {
  TransformOptions options;
  options.mode = header.mode;
  options.coupling.alpha = static_cast<double>(header.alpha);
  options.coupling.block_size = header.block_size;
  options.coupling.max_iterations = header.max_iterations;
  options.threads = threads;
  return options;
}

}  // namespace

void CodecConfig::validate() const {
  if (superpixels < 1) throw Error("K must be at least 1");
  if (!(compactness > 0)) throw Error("compactness must be positive");
  if (!(alpha >= 0) || !std::isfinite(alpha)) throw Error("alpha must be non-negative");
  if (block_size < 1 || block_size > 65535) throw Error("k_block must be in [1, 65535]");
  if (max_iterations < 0 || max_iterations > 65535) throw Error("max_iterations must be in [0, 65535]");
  if (!(lambda > 0) || !std::isfinite(lambda)) throw Error("lambda must be positive");
  if (!(class_threshold >= 0)) throw Error("class threshold must be non-negative");
  if (min_obs < 1 || min_obs > 65535) throw Error("min_obs must be in [1, 65535]");
  if (fixed_step_log2 > kMaxStepLog2) throw Error("fixed step exceeds the quantiser ladder");
}

std::vector<std::uint8_t> Bitstream::serialize() const {
  ByteWriter out;
  out.bytes(kMagic);
  out.u8(header.version);
  out.u16(header.n_u);
  out.u16(header.n_v);
  out.u32(header.width);
  out.u32(header.height);
  out.u32(header.superpixels);
  out.u8(static_cast<std::uint8_t>(header.mode));
  out.f32(header.alpha);
  out.u16(header.block_size);
  out.u16(header.max_iterations);
  out.u16(header.min_obs);

  out.varint(scan_indices.size());
  std::int64_t prev = 0;
  for (std::uint32_t idx : scan_indices) {
    const std::int64_t d = static_cast<std::int64_t>(idx) - prev;
    out.varint(d >= 0 ? static_cast<std::uint64_t>(d) << 1 : (static_cast<std::uint64_t>(-d) << 1) - 1);
    prev = idx;
  }
  for (const auto& row : quantizers.log2_step) out.bytes(row);

  out.section(segmentation);
  out.section(disparity);
  out.section(class_flags);
  for (const auto& payload : coefficients) out.section(payload);
  return std::move(out.buffer());
}

Bitstream Bitstream::parse(std::span<const std::uint8_t> data, std::size_t* consumed) {
  ByteReader in(data);
  Bitstream s;
  const auto magic = in.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError("not an LFGT bitstream");
  s.header.version = in.u8();
  if (s.header.version != kBitstreamVersion)
    throw FormatError("unsupported bitstream version " + std::to_string(s.header.version));
  s.header.n_u = in.u16();
  s.header.n_v = in.u16();
  s.header.width = in.u32();
  s.header.height = in.u32();
  s.header.superpixels = in.u32();
  const std::uint8_t mode = in.u8();
  if (mode > 2) throw FormatError("corrupt header (transform mode " + std::to_string(mode) + ")");
  s.header.mode = static_cast<TransformMode>(mode);
  s.header.alpha = in.f32();
  s.header.block_size = in.u16();
  s.header.max_iterations = in.u16();
  s.header.min_obs = in.u16();
  if (s.header.n_u == 0 || s.header.n_v == 0 || s.header.width == 0 || s.header.height == 0 ||
      s.header.width > 65535 || s.header.height > 65535)
    throw FormatError("corrupt header (dimensions)");
  if (s.header.superpixels == 0 ||
      static_cast<std::uint64_t>(s.header.superpixels) > static_cast<std::uint64_t>(s.header.width) * s.header.height)
    throw FormatError("corrupt header (super-ray count)");
  if (!(s.header.alpha >= 0) || !std::isfinite(s.header.alpha) || s.header.block_size == 0 || s.header.min_obs == 0)
    throw FormatError("corrupt header (coupling parameters)");

  in.set_section("scan order");
  const std::uint64_t count = in.varint();
  if (count > in.remaining()) throw FormatError("truncated bitstream in section 'scan order'");
  std::int64_t prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t z = in.varint();
    const std::int64_t d = (z & 1) ? -static_cast<std::int64_t>((z + 1) >> 1) : static_cast<std::int64_t>(z >> 1);
    prev += d;
    if (prev < 0 || prev > std::numeric_limits<std::uint32_t>::max()) throw FormatError("corrupt scan order");
    s.scan_indices.push_back(static_cast<std::uint32_t>(prev));
  }

  in.set_section("quantizer table");
  for (auto& row : s.quantizers.log2_step) {
    const auto bytes = in.bytes(row.size());
    std::copy(bytes.begin(), bytes.end(), row.begin());
    for (std::uint8_t v : row)
      if (v > kMaxStepLog2) throw FormatError("corrupt quantizer table");
  }

  auto read_section = [&](const std::string& name) {
    in.set_section(name);
    const auto bytes = in.section_bytes();
    return std::vector<std::uint8_t>(bytes.begin(), bytes.end());
  };
  s.segmentation = read_section("segmentation");
  s.disparity = read_section("disparity");
  s.class_flags = read_section("class flags");
  for (int c = 0; c < kClassCount; ++c)
    s.coefficients[static_cast<std::size_t>(c)] = read_section("class " + std::to_string(c) + " coefficients");
  if (consumed) *consumed = in.position();
  return s;
}

RateSplit rate_split(const Bitstream& stream) {
  RateSplit split;
  const std::size_t total = stream.serialize().size();
  split.segmentation = stream.segmentation.size() + 4;
  split.disparity = stream.disparity.size() + 4;
  split.coefficients = total - split.segmentation - split.disparity;
  return split;
}

std::uint64_t hash_light_field(const LightField& lf) {
  Fnv1a h;
  h.i64(lf.n_u());
  h.i64(lf.n_v());
  h.i64(lf.height());
  h.i64(lf.width());
  for (const auto& w : canonical_views(lf.n_u(), lf.n_v())) {
    const Image& img = lf.view(w);
    h.doubles(img.data());
  }
  return h.value();
}

EncodeResult encode_light_field(const LightField& lf, const DisparityMap& disparity,
                                const CodecConfig& config) {
  config.validate();
  if (lf.n_u() > 65535 || lf.n_v() > 65535 || lf.width() > 65535 || lf.height() > 65535)
    throw Error("light field dimensions exceed the bitstream limits");
  if (disparity.rows() != lf.height() || disparity.cols() != lf.width())
    throw Error("disparity map does not match the view size");
  if (static_cast<long long>(config.superpixels) > static_cast<long long>(lf.width()) * lf.height())
    throw Error("K exceeds the pixel count of a view");

  EncodeResult result;
  Bitstream stream;
  auto& h = stream.header;
  h.n_u = static_cast<std::uint16_t>(lf.n_u());
  h.n_v = static_cast<std::uint16_t>(lf.n_v());
  h.width = static_cast<std::uint32_t>(lf.width());
  h.height = static_cast<std::uint32_t>(lf.height());
  h.mode = config.mode;
  h.alpha = static_cast<float>(config.alpha);
  h.block_size = static_cast<std::uint16_t>(config.block_size);
  h.max_iterations = static_cast<std::uint16_t>(config.max_iterations);
  h.min_obs = static_cast<std::uint16_t>(config.min_obs);

  auto start = std::chrono::steady_clock::now();
  const SuperPixelMap sp = slic_segment(lf.view(0, 0), {config.superpixels, config.compactness, 10});
  h.superpixels = static_cast<std::uint32_t>(sp.count);
  std::vector<double> medians = median_disparities(sp, disparity);
  for (double& m : medians) m = dequantize_disparity(quantize_disparity(m));
  const SuperRaySegmentation seg = project_labels(sp, medians, lf.n_u(), lf.n_v());
  const auto members = collect_members(seg);
  stream.segmentation = encode_segmentation(sp);
  stream.disparity = encode_disparities(medians);
  result.stats.seconds_segmentation = seconds_since(start);
  result.stats.superpixels = sp.count;
  result.stats.cons_percent = coherence(seg, members).cons_percent;

  start = std::chrono::steady_clock::now();
  const TransformOptions options = transform_options(h, config.threads);
  TransformStats tstats;
  result.coefficients = forward_transform(lf, seg, members, options, &tstats);
  result.stats.seconds_transform = seconds_since(start);
  result.stats.max_vertices = tstats.max_vertices;
  result.stats.coupled_views = tstats.coupled_views;
  result.stats.reused_views = tstats.reused_views;
  result.stats.optimized_blocks = tstats.optimized_blocks;
  result.stats.increased_blocks = tstats.increased_blocks;

  start = std::chrono::steady_clock::now();
  const CoefficientTensor& tensor = result.coefficients;
  const auto layout = layout_of(tensor);
  const ScanOrder scan = learn_scan_order(tensor, config.min_obs);
  stream.scan_indices = scan_order_indices(scan, layout);
  const ClassAssignment classes = classify_super_rays(tensor, scan, config.class_threshold, config.class_search);
  stream.quantizers = choose_quantizers(tensor, scan, classes, config.lambda, config.fixed_step_log2);
  const QuantizedTensor symbols = quantize(tensor, scan, classes, stream.quantizers);
  result.dequantized = dequantize(symbols, layout, scan, classes, stream.quantizers);
  stream.class_flags = encode_class_flags(classes);
  for (int c = 0; c < kClassCount; ++c)
    stream.coefficients[static_cast<std::size_t>(c)] = encode_coefficients(symbols, layout, scan, classes, c);
  result.bytes = stream.serialize();
  result.stats.seconds_coding = seconds_since(start);
  for (int c : classes.classes) ++result.stats.class_histogram[static_cast<std::size_t>(c)];

  result.hashes["segmentation"] = hash_segmentation(seg);
  result.hashes["scan_order"] = hash_scan(scan);
  result.hashes["classes"] = hash_classes(classes, stream.quantizers);
  result.hashes["dequantized"] = hash_tensor(result.dequantized);
  result.hashes["bases"] = tstats.basis_hash;

  const double samples = static_cast<double>(lf.sample_count());
  result.stats.bytes = result.bytes.size();
  result.stats.bpp = 8.0 * static_cast<double>(result.bytes.size()) / samples;
  result.stats.split = rate_split(stream);

  // Parseval: coefficient-domain error equals the reconstruction error.
  double sse = 0.0;
  for (std::size_t k = 0; k < tensor.rays.size(); ++k)
    for (std::size_t b = 0; b < tensor.rays[k].size(); ++b)
      for (std::size_t a = 0; a < tensor.rays[k][b].size(); ++a) {
        const double e = tensor.rays[k][b][a] - result.dequantized.rays[k][b][a];
        sse += e * e;
      }
  result.stats.psnr = sse == 0.0 ? std::numeric_limits<double>::infinity()
                                 : 10.0 * std::log10(255.0 * 255.0 / (sse / samples));
  result.stats.psnr_8bit = std::numeric_limits<double>::quiet_NaN();

  if (config.local_decode) {
    start = std::chrono::steady_clock::now();
    DecodeResult decoded = decode_light_field(result.bytes, config.threads);
    result.stats.seconds_decode = seconds_since(start);
    for (const auto& [name, value] : decoded.hashes)
      if (name != "decoded" && result.hashes.at(name) != value)
        throw Error("decoder diverged from the encoder (" + name + ")");
    result.stats.psnr = psnr(lf, decoded.light_field);
    const LightField rounded = to_8bit(decoded.light_field);
    result.stats.psnr_8bit = psnr(lf, rounded);
    result.stats.lossless = is_lossless(result.stats.psnr_8bit);
    result.hashes["decoded"] = decoded.hashes.at("decoded");
    result.decoded = std::move(decoded.light_field);
  }
  return result;
}

DecodeResult decode_light_field(std::span<const std::uint8_t> bytes, int threads) {
  DecodeResult result;
  const Bitstream stream = Bitstream::parse(bytes, &result.consumed);
  const auto& h = stream.header;
  const int rows = static_cast<int>(h.height);
  const int cols = static_cast<int>(h.width);

  const SuperPixelMap sp = decode_segmentation(stream.segmentation, rows, cols);
  if (sp.count != static_cast<int>(h.superpixels))
    throw FormatError("segmentation payload disagrees with the header super-ray count");
  const std::vector<double> medians = decode_disparities(stream.disparity, sp.count);
  result.segmentation = project_labels(sp, medians, h.n_u, h.n_v);
  const auto members = collect_members(result.segmentation);

  const auto layout = layout_of(members, h.mode);
  const ScanOrder scan = scan_order_from_indices(stream.scan_indices, layout, h.min_obs);
  const ClassAssignment classes = decode_class_flags(stream.class_flags, sp.count);
  QuantizedTensor symbols;
  for (int c = 0; c < kClassCount; ++c)
    decode_coefficients(stream.coefficients[static_cast<std::size_t>(c)], layout, scan, classes, c, symbols);
  const CoefficientTensor dequantized = dequantize(symbols, layout, scan, classes, stream.quantizers);

  TransformStats tstats;
  result.light_field = inverse_transform(dequantized, result.segmentation, members,
                                         transform_options(h, threads), &tstats);

  result.hashes["segmentation"] = hash_segmentation(result.segmentation);
  result.hashes["scan_order"] = hash_scan(scan);
  result.hashes["classes"] = hash_classes(classes, stream.quantizers);
  result.hashes["dequantized"] = hash_tensor(dequantized);
  result.hashes["bases"] = tstats.basis_hash;
  result.hashes["decoded"] = hash_light_field(result.light_field);
  return result;
}

}  // namespace lfgt
