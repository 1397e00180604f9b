#pragma once

#include <filesystem>
#include <vector>

#include "lfgt/light_field.hpp"

namespace lfgt {

/// Super-pixel labels of the reference view. Labels are 0..count-1, each
/// label occurs and forms a 4-connected region.
struct SuperPixelMap {
  LabelMap labels;
  int count = 0;
};

struct SlicParams {
  int superpixels = 64;
  double compactness = 10.0;  // spatial weight on the 0-255 luminance scale
  int iterations = 10;
};

/// SLIC k-means over (luminance, row, col) from grid-initialised centres,
/// followed by connectivity enforcement. Labels are renumbered in raster
/// order of first occurrence.
SuperPixelMap slic_segment(const Image& view, const SlicParams& params);

/// Renumbers labels in raster order of first occurrence. Does not merge or
/// split regions.
SuperPixelMap canonicalize_labels(const LabelMap& labels);

/// True when every label 0..count-1 occurs and is 4-connected.
bool is_valid_superpixel_map(const SuperPixelMap& map);

/// Consistent labelling of every view of the light field.
struct SuperRaySegmentation {
  int n_u = 0;
  int n_v = 0;
  int count = 0;
  std::vector<LabelMap> views;          // canonical view order
  std::vector<double> median_disparity;  // one per super-ray

  int height() const { return views.empty() ? 0 : views.front().rows(); }
  int width() const { return views.empty() ? 0 : views.front().cols(); }
  const LabelMap& view(ViewIndex w) const { return views[static_cast<std::size_t>(w.u) * n_v + w.v]; }
  const LabelMap& view(int u, int v) const { return view(ViewIndex{u, v}); }
};

/// Lower median of the disparity over each label's reference pixels.
std::vector<double> median_disparities(const SuperPixelMap& sp, const DisparityMap& disparity);

/// Projects the reference labels to every view using each super-pixel's
/// median disparity. Row 0 is filled by horizontal projections from (0,0);
/// row m by a vertical projection (0,0)->(m,0) followed by horizontal
/// projections from (m,0). Collisions keep the higher median disparity,
/// holes are filled breadth-first preferring the lower median disparity.
SuperRaySegmentation project_labels(const SuperPixelMap& sp, const DisparityMap& disparity,
                                    int n_u, int n_v);

/// Same projection with per-super-ray disparities supplied directly (used by
/// the decoder, which receives quantised medians).
SuperRaySegmentation project_labels(const SuperPixelMap& sp, std::vector<double> medians,
                                    int n_u, int n_v);

/// Pixels of one super-ray, per view in which it is present. Pixels are in
/// canonical vertex order: column-major (scan down each column).
struct SuperRayMembers {
  struct ViewPixels {
    ViewIndex view;
    std::vector<Pixel> pixels;
  };
  std::vector<ViewPixels> views;  // canonical view order, nonempty views only

  std::size_t total_size() const;
  const ViewPixels* find(ViewIndex w) const;
};

/// Members of every super-ray, built in one pass over the label maps.
std::vector<SuperRayMembers> collect_members(const SuperRaySegmentation& seg);
SuperRayMembers members_of(const SuperRaySegmentation& seg, int label);

struct CoherenceReport {
  double cons_percent = 0.0;
  std::vector<bool> coherent;  // per super-ray
};

/// A super-ray is coherent when its pixel set in every view is a pure
/// translate of the set in every other view (and it is present in all views).
CoherenceReport coherence(const SuperRaySegmentation& seg);
CoherenceReport coherence(const SuperRaySegmentation& seg,
                          const std::vector<SuperRayMembers>& members);

/// Writes labels_<u>_<v>.pgm (16-bit) per view and median_disparity.json.
void export_segmentation(const std::filesystem::path& directory, const SuperRaySegmentation& seg);

}  // namespace lfgt
