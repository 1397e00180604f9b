#pragma once

#include <ostream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lfgt/segmentation.hpp"

namespace lfgt {

/// A vertex of a local graph: a pixel of one view. Angular graphs use only
/// the view part.
struct RayCoord {
  ViewIndex view;
  Pixel pixel;
  auto operator<=>(const RayCoord&) const = default;
};

/// Unweighted undirected graph with vertices in canonical order: views in
/// row-major order, then pixels column-major within each view.
class LocalGraph {
 public:
  LocalGraph() = default;
  LocalGraph(std::vector<RayCoord> vertices, std::vector<std::pair<int, int>> edges);

  int size() const { return static_cast<int>(vertices_.size()); }
  bool empty() const { return vertices_.empty(); }
  const std::vector<RayCoord>& vertices() const { return vertices_; }
  /// Sorted, unique pairs (i, j) with i < j.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::vector<int> degrees() const;

  Eigen::MatrixXd adjacency() const;
  /// L = D - A, dense.
  Eigen::MatrixXd laplacian() const;

  /// One "i j" line per edge.
  void write_edge_list(std::ostream& out) const;

 private:
  std::vector<RayCoord> vertices_;
  std::vector<std::pair<int, int>> edges_;
};

/// Spatial 4-neighbour edges inside every view of super-ray `k`, plus an
/// angular edge between each pixel and its projection (by the super-ray's
/// median disparity) into the next view down and the next view right when
/// that projection carries label k.
LocalGraph build_nonseparable_graph(const SuperRaySegmentation& seg, int k);
LocalGraph build_nonseparable_graph(const SuperRaySegmentation& seg, int k,
                                    const SuperRayMembers& members);

/// 4-connectivity inside one super-pixel. Empty when the super-ray is absent
/// from the view.
LocalGraph build_spatial_graph(const SuperRaySegmentation& seg, int k, ViewIndex view);
LocalGraph build_spatial_graph(const std::vector<Pixel>& pixels, ViewIndex view = {});

/// Graph over the given views (sorted into canonical order): edges between
/// angular-grid neighbours, then each still-isolated vertex is joined to its
/// nearest other vertex.
LocalGraph build_angular_graph(std::vector<ViewIndex> views);

}  // namespace lfgt
