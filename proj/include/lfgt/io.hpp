#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lfgt/light_field.hpp"

namespace lfgt {

// Light field directory layout:
//   metadata.json          {"n_u", "n_v", "width", "height", "bitdepth"}
//   view_<u>_<v>.pgm       binary P5, maxval 255, one per view (zero-based)
//   disparity.pfm          optional disparity of view (0,0), grayscale PFM

struct LightFieldMetadata {
  int n_u = 0;
  int n_v = 0;
  int width = 0;
  int height = 0;
  int bitdepth = 8;
};

LightFieldMetadata read_metadata(const std::filesystem::path& directory);

LightField load_light_field(const std::filesystem::path& directory);
void save_light_field(const std::filesystem::path& directory, const LightField& lf);

/// Reads `disparity.pfm` from a light field directory if present.
std::optional<DisparityMap> load_disparity(const std::filesystem::path& directory);
void save_disparity(const std::filesystem::path& directory, const DisparityMap& disparity);

std::string view_file_name(int u, int v);

/// Binary PGM (P5). 8-bit images require maxval 255; 16-bit images are
/// written big-endian with maxval 65535.
Image read_pgm(const std::filesystem::path& file);
void write_pgm8(const std::filesystem::path& file, const Image& image);
void write_pgm16(const std::filesystem::path& file, const Grid<int>& labels);
Grid<int> read_pgm16(const std::filesystem::path& file);

/// Grayscale PFM ("Pf"), little-endian, rows stored bottom to top.
Grid<double> read_pfm(const std::filesystem::path& file);
void write_pfm(const std::filesystem::path& file, const Grid<double>& image);

}  // namespace lfgt
