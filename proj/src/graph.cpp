#include "lfgt/graph.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace lfgt {
namespace {

std::vector<std::pair<int, int>> normalize_edges(std::vector<std::pair<int, int>> edges) {
  for (auto& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

// Index lookup for pixels of one super-pixel laid out on a local bounding box.
class PixelIndex {
 public:
  PixelIndex(const std::vector<Pixel>& pixels, int offset) {
    if (pixels.empty()) return;
    r0_ = c0_ = std::numeric_limits<int>::max();
    int r1 = std::numeric_limits<int>::min(), c1 = r1;
    for (const Pixel& p : pixels) {
      r0_ = std::min(r0_, p.row);
      c0_ = std::min(c0_, p.col);
      r1 = std::max(r1, p.row);
      c1 = std::max(c1, p.col);
    }
    rows_ = r1 - r0_ + 1;
    cols_ = c1 - c0_ + 1;
    table_.assign(static_cast<std::size_t>(rows_) * cols_, -1);
    for (std::size_t i = 0; i < pixels.size(); ++i)
      table_[static_cast<std::size_t>(pixels[i].row - r0_) * cols_ + (pixels[i].col - c0_)] =
          offset + static_cast<int>(i);
  }

  int find(int r, int c) const {
    r -= r0_;
    c -= c0_;
    if (r < 0 || c < 0 || r >= rows_ || c >= cols_) return -1;
    return table_[static_cast<std::size_t>(r) * cols_ + c];
  }

 private:
  int r0_ = 0, c0_ = 0, rows_ = 0, cols_ = 0;
  std::vector<int> table_;
};

void add_spatial_edges(const std::vector<Pixel>& pixels, const PixelIndex& index, int offset,
                       std::vector<std::pair<int, int>>& edges) {
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const int self = offset + static_cast<int>(i);
    const int down = index.find(pixels[i].row + 1, pixels[i].col);
    const int right = index.find(pixels[i].row, pixels[i].col + 1);
    if (down >= 0) edges.emplace_back(self, down);
    if (right >= 0) edges.emplace_back(self, right);
  }
}

}  // namespace

LocalGraph::LocalGraph(std::vector<RayCoord> vertices, std::vector<std::pair<int, int>> edges)
    : vertices_(std::move(vertices)), edges_(normalize_edges(std::move(edges))) {
  for (const auto& [a, b] : edges_)
    if (a == b || a < 0 || b >= size()) throw Error("invalid graph edge");
}

std::vector<int> LocalGraph::degrees() const {
  std::vector<int> deg(size(), 0);
  for (const auto& [a, b] : edges_) {
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

Eigen::MatrixXd LocalGraph::adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& [i, j] : edges_) a(i, j) = a(j, i) = 1.0;
  return a;
}

Eigen::MatrixXd LocalGraph::laplacian() const {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(size(), size());
  for (const auto& [i, j] : edges_) {
    l(i, j) = l(j, i) = -1.0;
    l(i, i) += 1.0;
    l(j, j) += 1.0;
  }
  return l;
}

void LocalGraph::write_edge_list(std::ostream& out) const {
  for (const auto& [i, j] : edges_) out << i << ' ' << j << '\n';
}

LocalGraph build_nonseparable_graph(const SuperRaySegmentation& seg, int k) {
  return build_nonseparable_graph(seg, k, members_of(seg, k));
}

LocalGraph build_nonseparable_graph(const SuperRaySegmentation& seg, int k,
                                    const SuperRayMembers& members) {
  if (k < 0 || k >= seg.count) throw Error("super-ray label out of range");
  const double d = seg.median_disparity[k];

  std::vector<RayCoord> vertices;
  std::vector<int> offsets;
  std::vector<PixelIndex> indices;
  std::vector<std::pair<int, int>> edges;
  for (const auto& vp : members.views) {
    const int offset = static_cast<int>(vertices.size());
    offsets.push_back(offset);
    indices.emplace_back(vp.pixels, offset);
    for (const Pixel& p : vp.pixels) vertices.push_back({vp.view, p});
    add_spatial_edges(vp.pixels, indices.back(), offset, edges);
  }

  // Angular edges towards the next view down (u+1) and right (v+1); the
  // reverse directions are the same undirected edges.
  auto view_slot = [&](ViewIndex w) -> int {
    for (std::size_t i = 0; i < members.views.size(); ++i)
      if (members.views[i].view == w) return static_cast<int>(i);
    return -1;
  };
  for (std::size_t a = 0; a < members.views.size(); ++a) {
    const auto& vp = members.views[a];
    for (const auto& [du, dv] : {std::pair{1, 0}, std::pair{0, 1}}) {
      const int b = view_slot({vp.view.u + du, vp.view.v + dv});
      if (b < 0) continue;
      const int sr = disparity_shift(d, du);
      const int sc = disparity_shift(d, dv);
      for (std::size_t i = 0; i < vp.pixels.size(); ++i) {
        const int q = indices[b].find(vp.pixels[i].row + sr, vp.pixels[i].col + sc);
        if (q >= 0) edges.emplace_back(offsets[a] + static_cast<int>(i), q);
      }
    }
  }
  return LocalGraph(std::move(vertices), std::move(edges));
}

LocalGraph build_spatial_graph(const SuperRaySegmentation& seg, int k, ViewIndex view) {
  if (k < 0 || k >= seg.count) throw Error("super-ray label out of range");
  const LabelMap& labels = seg.view(view);
  std::vector<Pixel> pixels;
  for (int c = 0; c < labels.cols(); ++c)
    for (int r = 0; r < labels.rows(); ++r)
      if (labels(r, c) == k) pixels.push_back({r, c});
  return build_spatial_graph(pixels, view);
}

LocalGraph build_spatial_graph(const std::vector<Pixel>& pixels, ViewIndex view) {
  std::vector<RayCoord> vertices;
  vertices.reserve(pixels.size());
  for (const Pixel& p : pixels) vertices.push_back({view, p});
  std::vector<std::pair<int, int>> edges;
  add_spatial_edges(pixels, PixelIndex(pixels, 0), 0, edges);
  return LocalGraph(std::move(vertices), std::move(edges));
}

LocalGraph build_angular_graph(std::vector<ViewIndex> views) {
  if (views.empty()) throw Error("angular graph needs at least one view");
  std::sort(views.begin(), views.end());
  views.erase(std::unique(views.begin(), views.end()), views.end());
  const int n = static_cast<int>(views.size());

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int du = std::abs(views[i].u - views[j].u);
      const int dv = std::abs(views[i].v - views[j].v);
      if (du + dv == 1) edges.emplace_back(i, j);
    }

  std::vector<int> degree(n, 0);
  for (const auto& [a, b] : edges) {
    ++degree[a];
    ++degree[b];
  }
  for (int i = 0; i < n; ++i) {
    if (degree[i] > 0 || n == 1) continue;
    int best = -1;
    long best_dist = std::numeric_limits<long>::max();
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const long du = views[i].u - views[j].u;
      const long dv = views[i].v - views[j].v;
      const long dist = du * du + dv * dv;
      if (dist < best_dist) {
        best_dist = dist;
        best = j;
      }
    }
    edges.emplace_back(i, best);
    ++degree[i];
    ++degree[best];
  }

  std::vector<RayCoord> vertices;
  vertices.reserve(n);
  for (const ViewIndex& w : views) vertices.push_back({w, {}});
  return LocalGraph(std::move(vertices), std::move(edges));
}

}  // namespace lfgt
