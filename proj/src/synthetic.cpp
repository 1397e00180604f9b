#include "lfgt/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace lfgt {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Box {
  int r0, c0, r1, c1;  // inclusive
};

Box bounding_box(const Layer& layer) {
  if (layer.shape == Layer::Shape::Rectangle)
    return {layer.row0, layer.col0, layer.row0 + layer.rows - 1, layer.col0 + layer.cols - 1};
  return {static_cast<int>(std::floor(layer.center_row - layer.radius)),
          static_cast<int>(std::floor(layer.center_col - layer.radius)),
          static_cast<int>(std::ceil(layer.center_row + layer.radius)),
          static_cast<int>(std::ceil(layer.center_col + layer.radius))};
}

bool layer_fits(const Layer& layer, int n_u, int n_v, int width, int height) {
  const Box box = bounding_box(layer);
  for (int u = 0; u < n_u; ++u)
    for (int v = 0; v < n_v; ++v) {
      const int dr = disparity_shift(layer.disparity, u);
      const int dc = disparity_shift(layer.disparity, v);
      // Only pixels actually covered matter; the box is conservative for disks.
      for (int r = box.r0; r <= box.r1; ++r)
        for (int c = box.c0; c <= box.c1; ++c)
          if (layer.covers(r, c) && !(r + dr >= 0 && r + dr < height && c + dc >= 0 && c + dc < width))
            return false;
    }
  return true;
}

double parse_number(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return value;
  } catch (const std::exception&) {
    throw Error("invalid value for '" + key + "': " + text);
  }
}

}  // namespace

double Texture::sample(int row, int col) const {
  double value = base + gradient_row * row + gradient_col * col;
  if (amplitude != 0.0) {
    const double w = 2.0 * std::numbers::pi / period;
    value += amplitude * std::sin(w * row + 0.7) * std::cos(w * 0.8 * col + 0.3);
  }
  if (noise != 0.0) {
    const std::uint64_t key = (std::uint64_t(seed) << 40) ^
                              (std::uint64_t(static_cast<std::uint32_t>(row)) << 20) ^
                              std::uint64_t(static_cast<std::uint32_t>(col));
    const double unit = static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
    value += noise * (2.0 * unit - 1.0);
  }
  return value;
}

bool Layer::covers(int row, int col) const {
  if (shape == Shape::Rectangle)
    return row >= row0 && row < row0 + rows && col >= col0 && col < col0 + cols;
  const double dr = row - center_row;
  const double dc = col - center_col;
  return dr * dr + dc * dc <= radius * radius;
}

RenderedScene render_synthetic(const SyntheticScene& scene, int n_u, int n_v, int width,
                               int height) {
  if (n_u < 1 || n_v < 1 || width < 1 || height < 1)
    throw Error("synthetic light field dimensions must be at least 1");
  for (std::size_t i = 1; i < scene.layers.size(); ++i)
    if (scene.layers[i].disparity < scene.layers[i - 1].disparity)
      throw Error("layers must be ordered by increasing disparity");
  for (std::size_t i = 0; i < scene.layers.size(); ++i) {
    const double d = scene.layers[i].disparity;
    if (!std::isfinite(d)) throw Error("layer disparity must be finite");
    if (!layer_fits(scene.layers[i], n_u, n_v, width, height))
      throw Error("layer " + std::to_string(i) + " is shifted out of frame");
  }

  LightField lf(n_u, n_v, height, width);
  RenderedScene out;
  out.view_labels.reserve(static_cast<std::size_t>(n_u) * n_v);
  for (int u = 0; u < n_u; ++u)
    for (int v = 0; v < n_v; ++v) {
      LabelMap labels(height, width, 0);
      Image& view = lf.view(u, v);
      const int bg_dr = disparity_shift(scene.background_disparity, u);
      const int bg_dc = disparity_shift(scene.background_disparity, v);
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) {
          double value = scene.background.sample(r - bg_dr, c - bg_dc);
          for (std::size_t i = scene.layers.size(); i-- > 0;) {
            const Layer& layer = scene.layers[i];
            const int rr = r - disparity_shift(layer.disparity, u);
            const int cc = c - disparity_shift(layer.disparity, v);
            if (layer.covers(rr, cc)) {
              value = layer.texture.sample(rr, cc);
              labels(r, c) = static_cast<int>(i) + 1;
              break;
            }
          }
          view(r, c) = std::clamp(std::round(value), 0.0, 255.0);
        }
      out.view_labels.push_back(std::move(labels));
    }

  out.labels = out.view_labels.front();
  out.disparity = DisparityMap(height, width, scene.background_disparity);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c)
      if (out.labels(r, c) > 0) out.disparity(r, c) = scene.layers[out.labels(r, c) - 1].disparity;
  out.light_field = std::move(lf);
  return out;
}

Layer parse_layer_spec(const std::string& spec, int width, int height) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  Layer layer;
  if (kind == "disk") {
    layer.shape = Layer::Shape::Disk;
    layer.center_row = (height - 1) / 2.0;
    layer.center_col = (width - 1) / 2.0;
    layer.radius = std::min(width, height) / 8.0;
  } else if (kind == "rect") {
    layer.shape = Layer::Shape::Rectangle;
    layer.rows = std::max(1, height / 4);
    layer.cols = std::max(1, width / 4);
    layer.row0 = (height - layer.rows) / 2;
    layer.col0 = (width - layer.cols) / 2;
  } else {
    throw Error("unknown layer shape '" + kind + "' (expected disk or rect)");
  }
  layer.texture.base = 200.0;

  std::map<std::string, double> values;
  if (colon != std::string::npos) {
    std::stringstream fields(spec.substr(colon + 1));
    std::string field;
    while (std::getline(fields, field, ',')) {
      if (field.empty()) continue;
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw Error("layer field without value: " + field);
      const std::string key = field.substr(0, eq);
      values[key] = parse_number(field.substr(eq + 1), key);
    }
  }
  for (const auto& [key, value] : values) {
    if (key == "d") layer.disparity = value;
    else if (key == "lum") layer.texture.base = value;
    else if (key == "amp") layer.texture.amplitude = value;
    else if (key == "period") layer.texture.period = value;
    else if (key == "noise") layer.texture.noise = value;
    else if (key == "seed") layer.texture.seed = static_cast<std::uint32_t>(value);
    else if (kind == "disk" && key == "r") layer.radius = value;
    else if (kind == "disk" && key == "cx") layer.center_row = value;
    else if (kind == "disk" && key == "cy") layer.center_col = value;
    else if (kind == "rect" && key == "row") layer.row0 = static_cast<int>(value);
    else if (kind == "rect" && key == "col") layer.col0 = static_cast<int>(value);
    else if (kind == "rect" && key == "h") layer.rows = static_cast<int>(value);
    else if (kind == "rect" && key == "w") layer.cols = static_cast<int>(value);
    else throw Error("unknown layer field '" + key + "' for " + kind);
  }
  if (layer.shape == Layer::Shape::Disk && layer.radius <= 0) throw Error("disk radius must be positive");
  if (layer.shape == Layer::Shape::Rectangle && (layer.rows < 1 || layer.cols < 1))
    throw Error("rectangle size must be positive");
  return layer;
}

SyntheticScene random_layered_scene(std::uint64_t seed, int n_u, int n_v, int width, int height,
                                    const RandomSceneOptions& options) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto make_texture = [&](std::uint32_t tex_seed) {
    Texture t;
    t.base = 40.0 + 170.0 * unit(rng);
    t.seed = tex_seed;
    if (!options.flat) {
      t.gradient_row = (unit(rng) - 0.5) * 1.0;
      t.gradient_col = (unit(rng) - 0.5) * 1.0;
      t.amplitude = options.texture_amplitude * (0.5 + 0.5 * unit(rng));
      t.period = 6.0 + 14.0 * unit(rng);
      t.noise = options.texture_noise;
    }
    return t;
  };

  SyntheticScene scene;
  scene.background_disparity = 0.0;
  scene.background = make_texture(static_cast<std::uint32_t>(seed * 31 + 1));

  const int min_dim = std::min(width, height);
  int attempts = 0;
  while (static_cast<int>(scene.layers.size()) < options.layers && attempts < 1000 * (options.layers + 1)) {
    ++attempts;
    Layer layer;
    double d = options.max_disparity * (0.25 + 0.75 * unit(rng));
    d = options.integer_disparities ? std::max(1.0, std::round(d)) : std::round(d * 8.0) / 8.0;
    layer.disparity = d;
    layer.texture = make_texture(static_cast<std::uint32_t>(seed * 31 + 7 + scene.layers.size()));
    if (unit(rng) < 0.5) {
      layer.shape = Layer::Shape::Disk;
      layer.radius = std::max(2.0, min_dim * (0.06 + 0.12 * unit(rng)));
      layer.center_row = layer.radius + (height - 2 * layer.radius) * unit(rng);
      layer.center_col = layer.radius + (width - 2 * layer.radius) * unit(rng);
    } else {
      layer.shape = Layer::Shape::Rectangle;
      layer.rows = std::max(3, static_cast<int>(min_dim * (0.1 + 0.2 * unit(rng))));
      layer.cols = std::max(3, static_cast<int>(min_dim * (0.1 + 0.2 * unit(rng))));
      layer.row0 = static_cast<int>((height - layer.rows) * unit(rng));
      layer.col0 = static_cast<int>((width - layer.cols) * unit(rng));
    }
    if (layer_fits(layer, n_u, n_v, width, height)) scene.layers.push_back(layer);
  }
  std::stable_sort(scene.layers.begin(), scene.layers.end(),
                   [](const Layer& a, const Layer& b) { return a.disparity < b.disparity; });
  return scene;
}

}  // namespace lfgt
