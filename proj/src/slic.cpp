#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "lfgt/segmentation.hpp"

namespace lfgt {
namespace {

constexpr int kDr[4] = {-1, 0, 0, 1};
constexpr int kDc[4] = {0, -1, 1, 0};

struct Center {
  double lum;
  double row;
  double col;
};

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Splits labels into 4-connected components, then merges every component
// smaller than `min_size` (and every unassigned one) into the adjacent
// component sharing the longest boundary with it.
LabelMap enforce_connectivity(const LabelMap& labels, int min_size) {
  const int rows = labels.rows();
  const int cols = labels.cols();
  LabelMap comp(rows, cols, -1);
  std::vector<int> comp_size;
  std::vector<int> comp_label;

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (comp(r, c) != -1) continue;
      const int id = static_cast<int>(comp_size.size());
      const int lab = labels(r, c);
      int size = 0;
      std::queue<Pixel> queue;
      queue.push({r, c});
      comp(r, c) = id;
      while (!queue.empty()) {
        const Pixel p = queue.front();
        queue.pop();
        ++size;
        for (int k = 0; k < 4; ++k) {
          const int nr = p.row + kDr[k];
          const int nc = p.col + kDc[k];
          if (comp.contains(nr, nc) && comp(nr, nc) == -1 && labels(nr, nc) == lab) {
            comp(nr, nc) = id;
            queue.push({nr, nc});
          }
        }
      }
      comp_size.push_back(size);
      comp_label.push_back(lab);
    }

  const int n = static_cast<int>(comp_size.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<int> merged_size = comp_size;
  std::vector<std::vector<int>> group(n);
  for (int id = 0; id < n; ++id) group[id] = {id};

  // Boundary lengths between components, gathered once.
  std::vector<std::vector<std::pair<int, int>>> boundary(n);
  {
    auto bump = [&](int a, int b) {
      auto& list = boundary[a];
      for (auto& [other, count] : list)
        if (other == b) {
          ++count;
          return;
        }
      list.emplace_back(b, 1);
    };
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const int a = comp(r, c);
        if (c + 1 < cols && comp(r, c + 1) != a) {
          bump(a, comp(r, c + 1));
          bump(comp(r, c + 1), a);
        }
        if (r + 1 < rows && comp(r + 1, c) != a) {
          bump(a, comp(r + 1, c));
          bump(comp(r + 1, c), a);
        }
      }
  }

  for (int id = 0; id < n; ++id) {
    const int root = find_root(parent, id);
    if (root != id) continue;  // already absorbed
    const bool orphan = comp_label[id] < 0;
    if (!orphan && merged_size[root] >= min_size) continue;
    // Aggregate boundary of the merged group rooted at `id`.
    std::vector<std::pair<int, int>> agg;
    for (int member : group[root]) {
      for (const auto& [other, count] : boundary[member]) {
        const int other_root = find_root(parent, other);
        if (other_root == root) continue;
        auto it = std::find_if(agg.begin(), agg.end(),
                               [&](const auto& e) { return e.first == other_root; });
        if (it == agg.end()) agg.emplace_back(other_root, count);
        else it->second += count;
      }
    }
    if (agg.empty()) continue;
    auto best = agg.front();
    for (const auto& e : agg)
      if (e.second > best.second || (e.second == best.second && e.first < best.first)) best = e;
    parent[root] = best.first;
    merged_size[best.first] += merged_size[root];
    group[best.first].insert(group[best.first].end(), group[root].begin(), group[root].end());
    group[root].clear();
  }

  LabelMap out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = find_root(parent, comp(r, c));
  return out;
}

}  // namespace

SuperPixelMap canonicalize_labels(const LabelMap& labels) {
  SuperPixelMap out{LabelMap(labels.rows(), labels.cols()), 0};
  int max_label = -1;
  for (int v : labels.data()) max_label = std::max(max_label, v);
  std::vector<int> table(static_cast<std::size_t>(max_label) + 1, -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int lab = labels[i];
    if (lab < 0) throw Error("negative label in label map");
    if (table[lab] < 0) table[lab] = out.count++;
    out.labels[i] = table[lab];
  }
  return out;
}

bool is_valid_superpixel_map(const SuperPixelMap& map) {
  const LabelMap& labels = map.labels;
  std::vector<int> size(map.count, 0);
  std::vector<int> first(map.count, -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int lab = labels[i];
    if (lab < 0 || lab >= map.count) return false;
    if (size[lab]++ == 0) first[lab] = static_cast<int>(i);
  }
  LabelMap seen(labels.rows(), labels.cols(), 0);
  for (int lab = 0; lab < map.count; ++lab) {
    if (size[lab] == 0) return false;
    std::queue<Pixel> queue;
    const Pixel start{first[lab] / labels.cols(), first[lab] % labels.cols()};
    queue.push(start);
    seen(start.row, start.col) = 1;
    int reached = 0;
    while (!queue.empty()) {
      const Pixel p = queue.front();
      queue.pop();
      ++reached;
      for (int k = 0; k < 4; ++k) {
        const int nr = p.row + kDr[k];
        const int nc = p.col + kDc[k];
        if (labels.contains(nr, nc) && !seen(nr, nc) && labels(nr, nc) == lab) {
          seen(nr, nc) = 1;
          queue.push({nr, nc});
        }
      }
    }
    if (reached != size[lab]) return false;
  }
  return true;
}

SuperPixelMap slic_segment(const Image& view, const SlicParams& params) {
  const int rows = view.rows();
  const int cols = view.cols();
  const long n = static_cast<long>(rows) * cols;
  if (params.superpixels < 1) throw Error("SLIC needs at least one super-pixel");
  if (params.superpixels > n) throw Error("SLIC super-pixel count exceeds pixel count");
  if (!(params.compactness > 0)) throw Error("SLIC compactness must be positive");

  const double step = std::sqrt(static_cast<double>(n) / params.superpixels);
  const int grid_rows = std::clamp(static_cast<int>(std::lround(rows / step)), 1, rows);
  const int grid_cols = std::clamp(static_cast<int>(std::lround(cols / step)), 1, cols);
  const double cell_h = static_cast<double>(rows) / grid_rows;
  const double cell_w = static_cast<double>(cols) / grid_cols;

  std::vector<Center> centers;
  centers.reserve(static_cast<std::size_t>(grid_rows) * grid_cols);
  for (int i = 0; i < grid_rows; ++i)
    for (int j = 0; j < grid_cols; ++j) {
      const double r = (i + 0.5) * cell_h - 0.5;
      const double c = (j + 0.5) * cell_w - 0.5;
      const int ri = std::clamp(static_cast<int>(std::lround(r)), 0, rows - 1);
      const int ci = std::clamp(static_cast<int>(std::lround(c)), 0, cols - 1);
      centers.push_back({view(ri, ci), r, c});
    }

  const double spatial_weight = params.compactness / step;
  const int half_r = static_cast<int>(std::ceil(std::max(step, cell_h)));
  const int half_c = static_cast<int>(std::ceil(std::max(step, cell_w)));

  LabelMap labels(rows, cols, -1);
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int iter = 0; iter < params.iterations; ++iter) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(labels.data().begin(), labels.data().end(), -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& ctr = centers[k];
      const int r0 = std::max(0, static_cast<int>(std::floor(ctr.row)) - half_r);
      const int r1 = std::min(rows - 1, static_cast<int>(std::ceil(ctr.row)) + half_r);
      const int c0 = std::max(0, static_cast<int>(std::floor(ctr.col)) - half_c);
      const int c1 = std::min(cols - 1, static_cast<int>(std::ceil(ctr.col)) + half_c);
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) {
          const double dr = r - ctr.row;
          const double dc = c - ctr.col;
          const double d = std::abs(view(r, c) - ctr.lum) + spatial_weight * std::sqrt(dr * dr + dc * dc);
          const std::size_t idx = static_cast<std::size_t>(r) * cols + c;
          if (d < dist[idx]) {
            dist[idx] = d;
            labels[idx] = static_cast<int>(k);
          }
        }
    }
    std::vector<double> sum_l(centers.size(), 0.0), sum_r(centers.size(), 0.0),
        sum_c(centers.size(), 0.0);
    std::vector<long> count(centers.size(), 0);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const int k = labels(r, c);
        if (k < 0) continue;
        sum_l[k] += view(r, c);
        sum_r[k] += r;
        sum_c[k] += c;
        ++count[k];
      }
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (count[k] > 0)
        centers[k] = {sum_l[k] / count[k], sum_r[k] / count[k], sum_c[k] / count[k]};
  }

  const int min_size = std::max<int>(1, static_cast<int>(n / params.superpixels / 4));
  return canonicalize_labels(enforce_connectivity(labels, min_size));
}

}  // namespace lfgt
