#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lfgt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that does not match its declared format or dimensions.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Problem instance too large for the dense solvers.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Position of a view on the angular grid: u is the angular row, v the
/// angular column. Canonical order is row-major (u, then v).
struct ViewIndex {
  int u = 0;
  int v = 0;
  auto operator<=>(const ViewIndex&) const = default;
};

/// Spatial position inside one view: row is x, col is y.
struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Dense row-major 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw Error("negative grid dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool contains(int r, int c) const { return r >= 0 && c >= 0 && r < rows_ && c < cols_; }

  T& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const T& operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  const std::vector<T>& data() const { return data_; }
  std::vector<T>& data() { return data_; }

  bool operator==(const Grid&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;
using LabelMap = Grid<int>;

/// Per-pixel disparity of view (0,0), in pixels of shift per unit angular step.
using DisparityMap = Grid<double>;

/// Integer displacement of a point with disparity `d` when moving `delta`
/// views along one angular axis. A point at x in view a appears at
/// round(x - d*delta) in view a + delta, ties rounded toward +infinity.
inline int disparity_shift(double d, int delta) {
  return static_cast<int>(std::floor(-d * delta + 0.5));
}

/// 4D luminance array LF(u, v, x, y), stored as n_u * n_v views of
/// height x width samples.
class LightField {
 public:
  LightField() = default;
  LightField(int n_u, int n_v, int height, int width, double fill = 0.0);
  LightField(int n_u, int n_v, std::vector<Image> views);

  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int view_count() const { return n_u_ * n_v_; }
  std::size_t sample_count() const {
    return static_cast<std::size_t>(view_count()) * height_ * width_;
  }

  const Image& view(int u, int v) const { return views_[flat(u, v)]; }
  Image& view(int u, int v) { return views_[flat(u, v)]; }
  const Image& view(ViewIndex w) const { return view(w.u, w.v); }
  Image& view(ViewIndex w) { return view(w.u, w.v); }

  double operator()(int u, int v, int x, int y) const { return views_[flat(u, v)](x, y); }
  double& operator()(int u, int v, int x, int y) { return views_[flat(u, v)](x, y); }

  bool same_shape(const LightField& other) const {
    return n_u_ == other.n_u_ && n_v_ == other.n_v_ && height_ == other.height_ &&
           width_ == other.width_;
  }

  bool operator==(const LightField&) const = default;

 private:
  std::size_t flat(int u, int v) const { return static_cast<std::size_t>(u) * n_v_ + v; }

  int n_u_ = 0;
  int n_v_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<Image> views_;
};

/// All views of an n_u x n_v grid in canonical (row-major) order.
std::vector<ViewIndex> canonical_views(int n_u, int n_v);

/// Mean squared error over every view and pixel.
double mean_squared_error(const LightField& reference, const LightField& decoded);

/// Peak signal-to-noise ratio for 8-bit data. Identical inputs return
/// +infinity, which `is_lossless` recognises.
double psnr(const LightField& reference, const LightField& decoded);

inline bool is_lossless(double psnr_db) { return std::isinf(psnr_db) && psnr_db > 0; }

/// Rounds every sample to the nearest integer in [0, 255].
LightField to_8bit(const LightField& lf);

}  // namespace lfgt
