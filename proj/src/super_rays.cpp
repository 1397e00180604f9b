#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "lfgt/io.hpp"
#include "lfgt/segmentation.hpp"

namespace lfgt {
namespace {

constexpr int kDr[4] = {-1, 0, 0, 1};
constexpr int kDc[4] = {0, -1, 1, 0};

// True when label a should win a cell over label b on collision.
bool wins_collision(int a, int b, const std::vector<double>& disparity) {
  if (disparity[a] != disparity[b]) return disparity[a] > disparity[b];
  return a < b;
}

// True when label a should win a hole over label b.
bool wins_hole(int a, int b, const std::vector<double>& disparity) {
  if (disparity[a] != disparity[b]) return disparity[a] < disparity[b];
  return a < b;
}

LabelMap project(const LabelMap& source, int delta_u, int delta_v,
                 const std::vector<double>& disparity) {
  LabelMap target(source.rows(), source.cols(), -1);
  for (int r = 0; r < source.rows(); ++r)
    for (int c = 0; c < source.cols(); ++c) {
      const int k = source(r, c);
      const int tr = r + disparity_shift(disparity[k], delta_u);
      const int tc = c + disparity_shift(disparity[k], delta_v);
      if (!target.contains(tr, tc)) continue;
      int& cell = target(tr, tc);
      if (cell < 0 || wins_collision(k, cell, disparity)) cell = k;
    }
  return target;
}

// Multi-source BFS in 4-connectivity. A hole reached by several fronts in the
// same step takes the lower-disparity label, then the smaller id.
void fill_holes(LabelMap& labels, const std::vector<double>& disparity) {
  std::vector<Pixel> frontier;
  for (int r = 0; r < labels.rows(); ++r)
    for (int c = 0; c < labels.cols(); ++c) {
      if (labels(r, c) < 0) continue;
      for (int k = 0; k < 4; ++k)
        if (labels.contains(r + kDr[k], c + kDc[k]) && labels(r + kDr[k], c + kDc[k]) < 0) {
          frontier.push_back({r, c});
          break;
        }
    }
  bool any_labeled = false;
  for (int v : labels.data()) any_labeled |= v >= 0;
  if (!any_labeled) throw Error("projection left a view without any labelled pixel");

  while (!frontier.empty()) {
    std::vector<Pixel> reached;
    for (const Pixel& p : frontier)
      for (int k = 0; k < 4; ++k) {
        const int nr = p.row + kDr[k];
        const int nc = p.col + kDc[k];
        if (labels.contains(nr, nc) && labels(nr, nc) == -1) {
          labels(nr, nc) = -2;  // queued this step
          reached.push_back({nr, nc});
        }
      }
    std::vector<int> choice(reached.size(), -1);
    for (std::size_t i = 0; i < reached.size(); ++i) {
      const Pixel p = reached[i];
      for (int k = 0; k < 4; ++k) {
        const int nr = p.row + kDr[k];
        const int nc = p.col + kDc[k];
        if (!labels.contains(nr, nc)) continue;
        const int cand = labels(nr, nc);
        if (cand < 0) continue;
        if (choice[i] < 0 || wins_hole(cand, choice[i], disparity)) choice[i] = cand;
      }
    }
    for (std::size_t i = 0; i < reached.size(); ++i) labels(reached[i].row, reached[i].col) = choice[i];
    frontier = std::move(reached);
  }
}

}  // namespace

std::vector<double> median_disparities(const SuperPixelMap& sp, const DisparityMap& disparity) {
  if (disparity.rows() != sp.labels.rows() || disparity.cols() != sp.labels.cols())
    throw Error("disparity map and super-pixel map dimensions differ");
  std::vector<std::vector<double>> values(sp.count);
  for (std::size_t i = 0; i < sp.labels.size(); ++i) {
    if (!std::isfinite(disparity[i])) throw Error("disparity values must be finite");
    values[sp.labels[i]].push_back(disparity[i]);
  }
  std::vector<double> medians(sp.count);
  for (int k = 0; k < sp.count; ++k) {
    auto& v = values[k];
    if (v.empty()) throw Error("super-pixel label without pixels");
    const std::size_t mid = (v.size() - 1) / 2;  // lower median
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    medians[k] = v[mid];
  }
  return medians;
}

SuperRaySegmentation project_labels(const SuperPixelMap& sp, const DisparityMap& disparity,
                                    int n_u, int n_v) {
  return project_labels(sp, median_disparities(sp, disparity), n_u, n_v);
}

SuperRaySegmentation project_labels(const SuperPixelMap& sp, std::vector<double> medians,
                                    int n_u, int n_v) {
  if (n_u < 1 || n_v < 1) throw Error("angular grid must be at least 1x1");
  if (static_cast<int>(medians.size()) != sp.count)
    throw Error("one disparity per super-pixel required");
  SuperRaySegmentation seg;
  seg.n_u = n_u;
  seg.n_v = n_v;
  seg.count = sp.count;
  seg.median_disparity = std::move(medians);
  seg.views.resize(static_cast<std::size_t>(n_u) * n_v);
  const auto& d = seg.median_disparity;

  seg.views[0] = sp.labels;
  for (int m = 0; m < n_u; ++m) {
    const std::size_t row_base = static_cast<std::size_t>(m) * n_v;
    if (m > 0) {
      seg.views[row_base] = project(sp.labels, m, 0, d);
      fill_holes(seg.views[row_base], d);
    }
    const LabelMap& anchor = seg.views[row_base];
    for (int j = 1; j < n_v; ++j) {
      LabelMap projected = project(anchor, 0, j, d);
      fill_holes(projected, d);
      seg.views[row_base + j] = std::move(projected);
    }
  }
  return seg;
}

std::size_t SuperRayMembers::total_size() const {
  std::size_t n = 0;
  for (const auto& v : views) n += v.pixels.size();
  return n;
}

const SuperRayMembers::ViewPixels* SuperRayMembers::find(ViewIndex w) const {
  for (const auto& v : views)
    if (v.view == w) return &v;
  return nullptr;
}

std::vector<SuperRayMembers> collect_members(const SuperRaySegmentation& seg) {
  std::vector<SuperRayMembers> members(seg.count);
  for (const ViewIndex w : canonical_views(seg.n_u, seg.n_v)) {
    const LabelMap& labels = seg.view(w);
    for (int c = 0; c < labels.cols(); ++c)
      for (int r = 0; r < labels.rows(); ++r) {
        auto& views = members[labels(r, c)].views;
        if (views.empty() || views.back().view != w) views.push_back({w, {}});
        views.back().pixels.push_back({r, c});
      }
  }
  return members;
}

SuperRayMembers members_of(const SuperRaySegmentation& seg, int label) {
  SuperRayMembers out;
  for (const ViewIndex w : canonical_views(seg.n_u, seg.n_v)) {
    const LabelMap& labels = seg.view(w);
    SuperRayMembers::ViewPixels vp{w, {}};
    for (int c = 0; c < labels.cols(); ++c)
      for (int r = 0; r < labels.rows(); ++r)
        if (labels(r, c) == label) vp.pixels.push_back({r, c});
    if (!vp.pixels.empty()) out.views.push_back(std::move(vp));
  }
  return out;
}

CoherenceReport coherence(const SuperRaySegmentation& seg) {
  return coherence(seg, collect_members(seg));
}

CoherenceReport coherence(const SuperRaySegmentation& seg,
                          const std::vector<SuperRayMembers>& members) {
  CoherenceReport report;
  report.coherent.assign(seg.count, false);
  const std::size_t n_views = static_cast<std::size_t>(seg.n_u) * seg.n_v;
  int coherent = 0;
  for (int k = 0; k < seg.count; ++k) {
    const auto& views = members[k].views;
    bool ok = views.size() == n_views;
    for (std::size_t i = 1; ok && i < views.size(); ++i) {
      const auto& a = views.front().pixels;
      const auto& b = views[i].pixels;
      if (a.size() != b.size()) {
        ok = false;
        break;
      }
      // Column-major order is preserved by translation.
      const int dr = b[0].row - a[0].row;
      const int dc = b[0].col - a[0].col;
      for (std::size_t p = 0; p < a.size(); ++p)
        if (b[p].row - a[p].row != dr || b[p].col - a[p].col != dc) {
          ok = false;
          break;
        }
    }
    report.coherent[k] = ok;
    coherent += ok;
  }
  report.cons_percent = seg.count > 0 ? 100.0 * coherent / seg.count : 100.0;
  return report;
}

void export_segmentation(const std::filesystem::path& directory, const SuperRaySegmentation& seg) {
  std::filesystem::create_directories(directory);
  for (const ViewIndex w : canonical_views(seg.n_u, seg.n_v))
    write_pgm16(directory / ("labels_" + std::to_string(w.u) + "_" + std::to_string(w.v) + ".pgm"),
                seg.view(w));
  nlohmann::json j;
  j["count"] = seg.count;
  j["median_disparity"] = seg.median_disparity;
  std::ofstream out(directory / "median_disparity.json");
  if (!out) throw Error("cannot write median_disparity.json");
  out << j.dump(2) << "\n";
}

}  // namespace lfgt
