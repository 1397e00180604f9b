#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "lfgt/light_field.hpp"

namespace lfgt::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("lfgt_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline LightField random_light_field(std::mt19937_64& rng, int n_u, int n_v, int h, int w) {
  std::uniform_int_distribution<int> dist(0, 255);
  LightField lf(n_u, n_v, h, w);
  for (int u = 0; u < n_u; ++u)
    for (int v = 0; v < n_v; ++v)
      for (int x = 0; x < h; ++x)
        for (int y = 0; y < w; ++y) lf(u, v, x, y) = dist(rng);
  return lf;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  return qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
}

}  // namespace lfgt::test
