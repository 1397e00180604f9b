#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lfgt/coupling.hpp"
#include "lfgt/segmentation.hpp"

namespace lfgt {

enum class TransformMode : std::uint8_t {
  NonSeparable = 0,
  Separable = 1,
  SeparableOptimized = 2,
};

std::string to_string(TransformMode mode);
/// Accepts "nonseparable", "separable", "separable-opt".
TransformMode parse_transform_mode(const std::string& text);

/// Coefficients of one super-ray: bands[b][a] is angular coefficient a of
/// spatial band b. The non-separable transform stores one coefficient per
/// band (a = 0).
using BandCoefficients = std::vector<std::vector<double>>;

/// R(super-ray, band, angular index).
struct CoefficientTensor {
  std::vector<BandCoefficients> rays;

  std::size_t coefficient_count() const;
  double energy() const;
};

/// Transform definition of one super-ray.
struct SuperRayTransform {
  TransformMode mode = TransformMode::Separable;
  std::vector<ViewIndex> views;  // views where the super-ray is present
  std::vector<int> view_sizes;

  Eigen::MatrixXd joint;                // non-separable basis
  std::vector<Eigen::MatrixXd> spatial;  // per view (separable modes)
  std::vector<std::vector<int>> band_views;  // per band: indices into `views`
  std::vector<int> band_basis;               // per band: index into `angular`
  std::vector<Eigen::MatrixXd> angular;

  std::vector<CoupledBasis> coupling;  // SeparableOptimized only (diagnostics)

  int band_count() const;
  std::size_t vertex_count() const;
};

/// Band b exists in a view iff that view's super-pixel has more than b pixels.
SuperRayTransform build_super_ray_transform(const SuperRaySegmentation& seg, int k,
                                            const SuperRayMembers& members, TransformMode mode,
                                            const CouplingParams& coupling);

/// Luminance of each view of a super-ray in canonical vertex order.
std::vector<Eigen::VectorXd> gather_signals(const LightField& lf, const SuperRayMembers& members);

BandCoefficients forward(const SuperRayTransform& t, const std::vector<Eigen::VectorXd>& signals);
std::vector<Eigen::VectorXd> inverse(const SuperRayTransform& t, const BandCoefficients& coeffs);

/// Spatial coefficients per view (separable modes) before the angular stage.
std::vector<Eigen::VectorXd> spatial_forward(const SuperRayTransform& t,
                                             const std::vector<Eigen::VectorXd>& signals);

struct TransformOptions {
  TransformMode mode = TransformMode::SeparableOptimized;
  CouplingParams coupling;
  int threads = 0;
};

/// Summary of the per-super-ray work, reduced in label order.
struct TransformStats {
  std::size_t max_vertices = 0;
  std::size_t coupled_views = 0;
  std::size_t reused_views = 0;
  std::size_t optimized_blocks = 0;
  std::size_t fallback_blocks = 0;
  std::size_t increased_blocks = 0;   // final objective above the B = I value
  double worst_orthogonality = 0.0;   // max |B^T B - I| over optimised blocks
  std::uint64_t basis_hash = 0;       // FNV-1a of every basis, label order
};

/// Builds each super-ray's transform and passes it to `visit` (called from
/// worker threads; one call per label, any order).
void for_each_transform(const SuperRaySegmentation& seg, const std::vector<SuperRayMembers>& members,
                        const TransformOptions& options,
                        const std::function<void(int, const SuperRayTransform&)>& visit);

CoefficientTensor forward_transform(const LightField& lf, const SuperRaySegmentation& seg,
                                    const std::vector<SuperRayMembers>& members,
                                    const TransformOptions& options,
                                    TransformStats* stats = nullptr);

/// Inverse of forward_transform; rebuilds every transform from the
/// segmentation.
LightField inverse_transform(const CoefficientTensor& tensor, const SuperRaySegmentation& seg,
                             const std::vector<SuperRayMembers>& members,
                             const TransformOptions& options, TransformStats* stats = nullptr);

}  // namespace lfgt
