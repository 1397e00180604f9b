#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lfgt/light_field.hpp"

namespace lfgt {

/// Luminance pattern attached to a layer, evaluated in the coordinates of
/// view (0,0) so that it moves rigidly with the layer's disparity.
struct Texture {
  double base = 128.0;
  double gradient_row = 0.0;
  double gradient_col = 0.0;
  double amplitude = 0.0;  // sinusoid amplitude
  double period = 16.0;    // sinusoid period in pixels
  double noise = 0.0;      // uniform noise half-width, hashed per reference pixel
  std::uint32_t seed = 0;

  double sample(int row, int col) const;
};

struct Layer {
  enum class Shape { Rectangle, Disk };

  Shape shape = Shape::Disk;
  // Disk
  double center_row = 0.0;
  double center_col = 0.0;
  double radius = 0.0;
  // Rectangle
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;

  double disparity = 0.0;
  Texture texture;

  bool covers(int row, int col) const;
};

/// Layered scene: a background plus foreground layers sorted by
/// non-decreasing disparity (the last covering layer is the frontmost).
struct SyntheticScene {
  double background_disparity = 0.0;
  Texture background;
  std::vector<Layer> layers;
};

struct RenderedScene {
  LightField light_field;
  DisparityMap disparity;              // view (0,0)
  LabelMap labels;                     // view (0,0): 0 = background, i = layer i-1
  std::vector<LabelMap> view_labels;   // same labelling for every view, canonical order
};

/// Renders the scene. Samples are rounded to integers in [0, 255].
/// Throws if a layer leaves the frame in any view or layers are unsorted.
RenderedScene render_synthetic(const SyntheticScene& scene, int n_u, int n_v, int width,
                               int height);

/// Parses "disk:d=1,r=8,cx=32,cy=32,lum=200,amp=0,noise=0" or
/// "rect:d=1,row=4,col=4,h=10,w=12,lum=60". Omitted geometry defaults to a
/// centred shape a quarter of the frame in size.
Layer parse_layer_spec(const std::string& spec, int width, int height);

struct RandomSceneOptions {
  int layers = 6;
  double max_disparity = 1.0;
  bool integer_disparities = false;
  double texture_amplitude = 40.0;
  double texture_noise = 0.0;
  bool flat = false;  // constant luminance per layer
};

/// Deterministic pseudo-random layered scene whose layers stay in frame for
/// an n_u x n_v angular grid.
SyntheticScene random_layered_scene(std::uint64_t seed, int n_u, int n_v, int width, int height,
                                    const RandomSceneOptions& options = {});

}  // namespace lfgt
