// Command-line driver: synth, segment, encode, decode, analyze.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfgt/analysis.hpp"
#include "lfgt/codec.hpp"
#include "lfgt/io.hpp"
#include "lfgt/segmentation.hpp"
#include "lfgt/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace lfgt;

namespace {

std::pair<int, int> parse_pair(const std::string& text, const std::string& what) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    std::size_t used = 0;
    const int a = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument(text);
    const std::string rest = text.substr(x + 1);
    const int b = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument(text);
    if (a < 1 || b < 1) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::exception&) {
    throw Error("invalid " + what + " '" + text + "' (expected AxB with positive integers)");
  }
}

json number_or_sentinel(double v) {
  if (std::isinf(v) && v > 0) return "lossless";
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

DisparityMap disparity_or_zero(const fs::path& dir, const LightField& lf) {
  if (auto d = load_disparity(dir)) return *d;
  std::cerr << "warning: no disparity.pfm in " << dir.string() << "; assuming zero disparity\n";
  return DisparityMap(lf.height(), lf.width(), 0.0);
}

// Options shared by encode and analyze; unset values fall back to --config,
// then to the built-in defaults.
struct CodecFlags {
  std::string config_file;
  std::optional<std::string> mode;
  std::optional<int> superpixels;
  std::optional<double> compactness;
  std::optional<double> alpha;
  std::optional<int> block_size;
  std::optional<int> max_iterations;
  std::optional<double> lambda;
  std::optional<double> class_threshold;
  std::optional<std::string> class_search;
  std::optional<int> min_obs;
  std::optional<int> fixed_step;
  std::optional<int> threads;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON file with codec settings")->check(CLI::ExistingFile);
    app->add_option("--mode", mode, "nonseparable | separable | separable-opt");
    app->add_option("--superpixels", superpixels, "super-ray count K");
    app->add_option("--compactness", compactness, "SLIC compactness");
    app->add_option("--alpha", alpha, "coupling weight");
    app->add_option("--k-block", block_size, "eigenvectors per optimised block");
    app->add_option("--max-iters", max_iterations, "optimiser iterations per block");
    app->add_option("--lambda", lambda, "rate-distortion Lagrange multiplier");
    app->add_option("--class-threshold", class_threshold, "mean energy threshold of the discard classes");
    app->add_option("--class-search", class_search, "descending | ascending");
    app->add_option("--min-obs", min_obs, "observations needed to rank a scan position");
    app->add_option("--fixed-step", fixed_step, "force quantiser step 2^n for every group");
    app->add_option("--threads", threads, "worker threads (0 = all cores)");
  }

  CodecConfig resolve() const {
    CodecConfig c;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw Error("invalid config file: " + std::string(e.what()));
      }
      static const std::vector<std::string> known = {
          "mode", "superpixels", "compactness", "alpha", "k_block", "max_iterations", "lambda",
          "class_threshold", "class_search", "min_obs", "fixed_step", "threads"};
      for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
          throw Error("unknown config key '" + key + "'");
      }
      try {
        if (j.contains("mode")) c.mode = parse_transform_mode(j["mode"].get<std::string>());
        if (j.contains("superpixels")) c.superpixels = j["superpixels"].get<int>();
        if (j.contains("compactness")) c.compactness = j["compactness"].get<double>();
        if (j.contains("alpha")) c.alpha = j["alpha"].get<double>();
        if (j.contains("k_block")) c.block_size = j["k_block"].get<int>();
        if (j.contains("max_iterations")) c.max_iterations = j["max_iterations"].get<int>();
        if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
        if (j.contains("class_threshold")) c.class_threshold = j["class_threshold"].get<double>();
        if (j.contains("class_search")) c.class_search = parse_search(j["class_search"].get<std::string>());
        if (j.contains("min_obs")) c.min_obs = j["min_obs"].get<int>();
        if (j.contains("fixed_step")) c.fixed_step_log2 = j["fixed_step"].get<int>();
        if (j.contains("threads")) c.threads = j["threads"].get<int>();
      } catch (const json::exception& e) {
        throw Error("invalid config value: " + std::string(e.what()));
      }
    }
    if (mode) c.mode = parse_transform_mode(*mode);
    if (superpixels) c.superpixels = *superpixels;
    if (compactness) c.compactness = *compactness;
    if (alpha) c.alpha = *alpha;
    if (block_size) c.block_size = *block_size;
    if (max_iterations) c.max_iterations = *max_iterations;
    if (lambda) c.lambda = *lambda;
    if (class_threshold) c.class_threshold = *class_threshold;
    if (class_search) c.class_search = parse_search(*class_search);
    if (min_obs) c.min_obs = *min_obs;
    if (fixed_step) c.fixed_step_log2 = *fixed_step;
    if (threads) c.threads = *threads;
    c.validate();
    return c;
  }

  static ClassSearch parse_search(const std::string& s) {
    if (s == "descending") return ClassSearch::Descending;
    if (s == "ascending") return ClassSearch::Ascending;
    throw Error("unknown class search '" + s + "' (expected descending or ascending)");
  }
};

json encode_stats_json(const EncodeStats& s, const CodecConfig& c) {
  json j;
  j["mode"] = to_string(c.mode);
  j["superpixels"] = s.superpixels;
  j["bytes"] = s.bytes;
  j["bpp"] = s.bpp;
  j["psnr"] = number_or_sentinel(s.psnr);
  j["psnr_8bit"] = number_or_sentinel(s.psnr_8bit);
  j["lossless"] = s.lossless;
  const double total = static_cast<double>(s.split.total());
  j["rate_split"] = {
      {"segmentation_percent", 100.0 * static_cast<double>(s.split.segmentation) / total},
      {"disparity_percent", 100.0 * static_cast<double>(s.split.disparity) / total},
      {"coefficients_percent", 100.0 * static_cast<double>(s.split.coefficients) / total},
  };
  j["cons_percent"] = s.cons_percent;
  j["class_histogram"] = s.class_histogram;
  j["max_vertices"] = s.max_vertices;
  j["coupled_views"] = s.coupled_views;
  j["reused_views"] = s.reused_views;
  j["optimized_blocks"] = s.optimized_blocks;
  j["timing_seconds"] = {
      {"segmentation", s.seconds_segmentation},
      {"transform", s.seconds_transform},
      {"coding", s.seconds_coding},
      {"decode", s.seconds_decode},
  };
  return j;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void save_8bit(const fs::path& dir, const LightField& lf) { save_light_field(dir, to_8bit(lf)); }

int run_synth(const std::string& out, const std::string& views, const std::string& size,
              const std::vector<std::string>& layers, int random_layers, std::uint64_t seed,
              double max_disparity, double background_disparity, double background_lum,
              bool integer_disparities) {
  const auto [n_u, n_v] = parse_pair(views, "--views");
  const auto [width, height] = parse_pair(size, "--size");
  SyntheticScene scene;
  if (random_layers > 0) {
    RandomSceneOptions opts;
    opts.layers = random_layers;
    opts.max_disparity = max_disparity;
    opts.integer_disparities = integer_disparities;
    scene = random_layered_scene(seed, n_u, n_v, width, height, opts);
  }
  scene.background_disparity = background_disparity;
  if (random_layers == 0) scene.background.base = background_lum;
  for (const auto& spec : layers) scene.layers.push_back(parse_layer_spec(spec, width, height));
  std::stable_sort(scene.layers.begin(), scene.layers.end(),
                   [](const Layer& a, const Layer& b) { return a.disparity < b.disparity; });
  const RenderedScene r = render_synthetic(scene, n_u, n_v, width, height);
  fs::create_directories(out);
  save_light_field(out, r.light_field);
  save_disparity(out, r.disparity);
  for (const auto& w : canonical_views(n_u, n_v))
    write_pgm16(fs::path(out) / ("truth_" + std::to_string(w.u) + "_" + std::to_string(w.v) + ".pgm"),
                r.view_labels[static_cast<std::size_t>(w.u * n_v + w.v)]);
  json j{{"views", n_u * n_v}, {"width", width}, {"height", height}, {"layers", scene.layers.size()}};
  std::cout << j.dump() << '\n';
  return 0;
}

int run_segment(const std::string& input, const std::string& out, int k, double compactness) {
  const LightField lf = load_light_field(input);
  const DisparityMap d = disparity_or_zero(input, lf);
  const SuperPixelMap sp = slic_segment(lf.view(0, 0), {k, compactness, 10});
  const SuperRaySegmentation seg = project_labels(sp, d, lf.n_u(), lf.n_v());
  const CoherenceReport rep = coherence(seg);
  fs::create_directories(out);
  export_segmentation(out, seg);
  json j{{"superpixels", sp.count}, {"cons_percent", rep.cons_percent}};
  j["coherent"] = rep.coherent;
  open_output(fs::path(out) / "coherence.json") << j.dump(2) << '\n';
  std::cout << json{{"superpixels", sp.count}, {"cons_percent", rep.cons_percent}}.dump() << '\n';
  return 0;
}

int run_encode(const std::string& input, const std::string& output, const CodecFlags& flags,
               bool no_local_decode) {
  CodecConfig config = flags.resolve();
  config.local_decode = !no_local_decode;
  const LightField lf = load_light_field(input);
  const DisparityMap d = disparity_or_zero(input, lf);
  const EncodeResult r = encode_light_field(lf, d, config);
  write_file(output, r.bytes);
  json j = encode_stats_json(r.stats, config);
  json hashes;
  for (const auto& [name, value] : r.hashes) hashes[name] = hex(value);
  j["hashes"] = hashes;
  std::cout << j.dump() << '\n';
  return 0;
}

int run_decode(const std::string& input, const std::string& out, int threads) {
  const auto bytes = read_file(input);
  const DecodeResult r = decode_light_field(bytes, threads);
  if (r.consumed != bytes.size())
    std::cerr << "warning: " << bytes.size() - r.consumed << " trailing bytes after the bitstream\n";
  fs::create_directories(out);
  save_8bit(out, r.light_field);
  json hashes;
  for (const auto& [name, value] : r.hashes) hashes[name] = hex(value);
  std::cout << json{{"consumed", r.consumed}, {"hashes", hashes}}.dump() << '\n';
  return 0;
}

int run_analyze(const std::string& input, const std::string& bitstream, const std::string& out,
                const CodecFlags& flags) {
  fs::create_directories(out);
  json summary;
  if (!bitstream.empty()) {
    if (input.empty()) throw Error("--bitstream needs --input with the reference light field");
    const LightField ref = load_light_field(input);
    const RateAllocation r = rate_allocation_report(read_file(bitstream), ref, flags.resolve().threads);
    summary["rate_allocation"] = {{"Segmentation", r.segmentation_percent},
                                  {"Disparity", r.disparity_percent},
                                  {"Coefficients", r.coefficients_percent},
                                  {"bpp", r.bpp},
                                  {"PSNR", number_or_sentinel(r.psnr)}};
    open_output(fs::path(out) / "rate_allocation.json") << summary["rate_allocation"].dump(2) << '\n';
    std::cout << summary.dump() << '\n';
    return 0;
  }
  if (input.empty()) throw Error("analyze needs --input");
  const CodecConfig config = flags.resolve();
  const LightField lf = load_light_field(input);
  const DisparityMap d = disparity_or_zero(input, lf);
  const SuperPixelMap sp = slic_segment(lf.view(0, 0), {config.superpixels, config.compactness, 10});
  const SuperRaySegmentation seg = project_labels(sp, d, lf.n_u(), lf.n_v());
  const auto members = collect_members(seg);
  const CoherenceReport rep = coherence(seg, members);
  summary["superpixels"] = sp.count;
  summary["cons_percent"] = rep.cons_percent;

  TransformOptions options;
  options.coupling = {config.alpha, config.block_size, config.max_iterations};
  options.threads = config.threads;
  json comparison;
  for (TransformMode mode : {TransformMode::Separable, TransformMode::SeparableOptimized}) {
    options.mode = mode;
    const std::string name = to_string(mode);
    const CoefficientTensor tensor = forward_transform(lf, seg, members, options);
    const ScanOrder scan = learn_scan_order(tensor, config.min_obs);
    const CompactionCurve curve = compaction_curve(tensor, scan);
    {
      auto file = open_output(fs::path(out) / ("compaction_" + name + ".csv"));
      write_compaction_csv(file, curve);
    }
    const SpatialCoefficients spatial = spatial_coefficients(lf, seg, members, options);
    const CompactionCurve spatial_curve = spatial_compaction_curve(spatial);
    {
      auto file = open_output(fs::path(out) / ("spatial_compaction_" + name + ".csv"));
      write_compaction_csv(file, spatial_curve);
    }
    json entry{{"compaction_at_10", curve.at(0.10)},
               {"compaction_at_25", curve.at(0.25)},
               {"spatial_compaction_at_10", spatial_curve.at(0.10)},
               {"spatial_compaction_at_25", spatial_curve.at(0.25)}};
    if (lf.view_count() >= 2) {
      const BandStatistics stats = band_statistics(spatial, tensor);
      {
        auto file = open_output(fs::path(out) / ("correlation_" + name + ".csv"));
        write_correlation_csv(file, stats);
      }
      {
        auto file = open_output(fs::path(out) / ("covariance_" + name + ".csv"));
        write_covariance_csv(file, stats);
      }
      {
        auto file = open_output(fs::path(out) / ("log_variance_" + name + ".csv"));
        write_log_variance_csv(file, stats);
      }
      entry["mean_abs_correlation_bands_1_5"] = number_or_sentinel(stats.mean_abs_correlation(1, 5));
    }
    comparison[name] = entry;
  }
  summary["coupling_comparison"] = comparison;
  open_output(fs::path(out) / "coupling_comparison.json") << comparison.dump(2) << '\n';
  open_output(fs::path(out) / "coherence.json")
      << json{{"superpixels", sp.count}, {"cons_percent", rep.cons_percent}}.dump(2) << '\n';
  std::cout << summary.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Light field codec built on local graph transforms over super-rays"};
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "render a synthetic layered light field");
  std::string synth_out, views = "3x3", size = "64x64";
  std::vector<std::string> layers;
  int random_layers = 0;
  std::uint64_t seed = 1;
  double max_disparity = 1.0, background_disparity = 0.0, background_lum = 128.0;
  bool integer_disparities = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--views", views, "angular grid, rows x cols");
  synth->add_option("--size", size, "view size, width x height");
  synth->add_option("--layers", layers, "layer spec, e.g. disk:d=1,r=8 (repeatable)");
  synth->add_option("--random-layers", random_layers, "number of random layers");
  synth->add_option("--seed", seed, "seed for random layers");
  synth->add_option("--max-disparity", max_disparity, "largest random layer disparity");
  synth->add_option("--background-disparity", background_disparity, "background disparity");
  synth->add_option("--background", background_lum, "background luminance");
  synth->add_flag("--integer-disparities", integer_disparities, "round random disparities");

  auto* segment = app.add_subcommand("segment", "super-ray segmentation of a light field");
  std::string seg_in, seg_out;
  int seg_k = 64;
  double seg_compactness = 10.0;
  segment->add_option("--input", seg_in, "light field directory")->required()->check(CLI::ExistingDirectory);
  segment->add_option("--out", seg_out, "output directory")->required();
  segment->add_option("--superpixels", seg_k, "super-ray count K");
  segment->add_option("--compactness", seg_compactness, "SLIC compactness");

  auto* encode = app.add_subcommand("encode", "encode a light field directory");
  std::string enc_in, enc_out;
  bool no_local_decode = false;
  CodecFlags enc_flags;
  encode->add_option("--input", enc_in, "light field directory")->required()->check(CLI::ExistingDirectory);
  encode->add_option("--output", enc_out, "bitstream file")->required();
  encode->add_flag("--no-local-decode", no_local_decode, "skip the decoder pass used for stats");
  enc_flags.add(encode);

  auto* decode = app.add_subcommand("decode", "decode a bitstream to a light field directory");
  std::string dec_in, dec_out;
  int dec_threads = 0;
  decode->add_option("--input", dec_in, "bitstream file")->required()->check(CLI::ExistingFile);
  decode->add_option("--out", dec_out, "output directory")->required();
  decode->add_option("--threads", dec_threads, "worker threads (0 = all cores)");

  auto* analyze = app.add_subcommand("analyze", "compaction, correlation and rate reports");
  std::string an_in, an_bits, an_out;
  CodecFlags an_flags;
  analyze->add_option("--input", an_in, "light field directory")->check(CLI::ExistingDirectory);
  analyze->add_option("--bitstream", an_bits, "bitstream for the rate allocation report")->check(CLI::ExistingFile);
  analyze->add_option("--out", an_out, "output directory")->required();
  an_flags.add(analyze);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth)
      return run_synth(synth_out, views, size, layers, random_layers, seed, max_disparity,
                       background_disparity, background_lum, integer_disparities);
    if (*segment) return run_segment(seg_in, seg_out, seg_k, seg_compactness);
    if (*encode) return run_encode(enc_in, enc_out, enc_flags, no_local_decode);
    if (*decode) return run_decode(dec_in, dec_out, dec_threads);
    if (*analyze) return run_analyze(an_in, an_bits, an_out, an_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
