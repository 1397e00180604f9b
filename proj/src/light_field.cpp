#include "lfgt/light_field.hpp"

#include <algorithm>
#include <limits>

namespace lfgt {

LightField::LightField(int n_u, int n_v, int height, int width, double fill)
    : n_u_(n_u), n_v_(n_v), height_(height), width_(width) {
  if (n_u < 1 || n_v < 1 || height < 1 || width < 1)
    throw Error("light field dimensions must be at least 1");
  views_.assign(static_cast<std::size_t>(n_u) * n_v, Image(height, width, fill));
}

LightField::LightField(int n_u, int n_v, std::vector<Image> views)
    : n_u_(n_u), n_v_(n_v), views_(std::move(views)) {
  if (n_u < 1 || n_v < 1) throw Error("light field dimensions must be at least 1");
  if (views_.size() != static_cast<std::size_t>(n_u) * n_v)
    throw Error("view count does not match angular grid");
  height_ = views_.front().rows();
  width_ = views_.front().cols();
  if (height_ < 1 || width_ < 1) throw Error("light field dimensions must be at least 1");
  for (const auto& view : views_) {
    if (view.rows() != height_ || view.cols() != width_)
      throw Error("views have inconsistent dimensions");
    for (double s : view.data())
      if (!std::isfinite(s)) throw Error("light field samples must be finite");
  }
}

std::vector<ViewIndex> canonical_views(int n_u, int n_v) {
  std::vector<ViewIndex> out;
  out.reserve(static_cast<std::size_t>(n_u) * n_v);
  for (int u = 0; u < n_u; ++u)
    for (int v = 0; v < n_v; ++v) out.push_back({u, v});
  return out;
}

double mean_squared_error(const LightField& reference, const LightField& decoded) {
  if (!reference.same_shape(decoded)) throw Error("psnr: light field shapes differ");
  double sum = 0.0;
  for (int u = 0; u < reference.n_u(); ++u)
    for (int v = 0; v < reference.n_v(); ++v) {
      const auto& a = reference.view(u, v).data();
      const auto& b = decoded.view(u, v).data();
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        sum += e * e;
      }
    }
  return sum / static_cast<double>(reference.sample_count());
}

double psnr(const LightField& reference, const LightField& decoded) {
  const double mse = mean_squared_error(reference, decoded);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

LightField to_8bit(const LightField& lf) {
  LightField out = lf;
  for (int u = 0; u < lf.n_u(); ++u)
    for (int v = 0; v < lf.n_v(); ++v)
      for (double& s : out.view(u, v).data()) s = std::clamp(std::round(s), 0.0, 255.0);
  return out;
}

}  // namespace lfgt
