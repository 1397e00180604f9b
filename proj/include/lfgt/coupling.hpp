#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lfgt/segmentation.hpp"
#include "lfgt/spectral.hpp"

namespace lfgt {

inline constexpr int kMaxCorrespondences = 15;

/// Paired vertices between a reference super-pixel (n0 vertices) and a
/// target super-pixel (ni vertices). F and G are the one-hot indicator
/// matrices of sizes n0 x p and ni x p.
struct CorrespondenceSet {
  std::vector<std::pair<int, int>> pairs;  // (reference vertex, target vertex)
  int reference_size = 0;
  int target_size = 0;

  int size() const { return static_cast<int>(pairs.size()); }
  Eigen::MatrixXd F() const;
  Eigen::MatrixXd G() const;
};

/// Greedy farthest point sampling. Seeds with the point closest to the
/// centroid, then repeatedly adds the point maximising the minimum distance
/// to those already chosen; ties go to the lower index. Returns indices in
/// selection order.
std::vector<int> farthest_point_sampling(const std::vector<Pixel>& points, int count);

/// Pairs every reference pixel whose disparity-projected position lands
/// inside the target super-pixel, thinned by farthest point sampling to at
/// most `max_points`. Returns nullopt when no pixel lands inside.
std::optional<CorrespondenceSet> build_correspondences(const std::vector<Pixel>& reference,
                                                       ViewIndex reference_view,
                                                       const std::vector<Pixel>& target,
                                                       ViewIndex target_view, double disparity,
                                                       int max_points = kMaxCorrespondences);

// Objective  ||B^T diag(lambda) B - diag(lambda)||_F^2
//          + alpha ||F^T U0 - G^T Ui B||_F^2
// over square mixing matrices B. U0 and Ui hold the eigenvector columns of
// the reference and target super-pixels for the block being optimised.

double diagonal_term(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda);
/// 4 (Lambda B B^T Lambda B - Lambda B Lambda)
Eigen::MatrixXd diagonal_term_gradient(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda);

double coherence_term(const Eigen::MatrixXd& mixing, const Eigen::MatrixXd& reference_basis,
                      const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                      const Eigen::MatrixXd& g);
/// 2 Ui^T G (G^T Ui B - F^T U0)
Eigen::MatrixXd coherence_term_gradient(const Eigen::MatrixXd& mixing,
                                        const Eigen::MatrixXd& reference_basis,
                                        const Eigen::MatrixXd& target_basis,
                                        const Eigen::MatrixXd& f, const Eigen::MatrixXd& g);

double coupling_objective(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda,
                          const Eigen::MatrixXd& reference_basis,
                          const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                          const Eigen::MatrixXd& g, double alpha);
Eigen::MatrixXd coupling_gradient(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda,
                                  const Eigen::MatrixXd& reference_basis,
                                  const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                                  const Eigen::MatrixXd& g, double alpha);

struct OptimizerSettings {
  int max_iterations = 200;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 60;
  double gradient_tolerance = 1e-6;  // relative to 1 + |objective|
  double stall_decrease = 1e-9;      // relative decrease over `stall_window` iterations
  int stall_window = 5;
};

struct BlockResult {
  Eigen::MatrixXd mixing;     // k x k orthonormal
  std::vector<double> trace;  // objective per accepted iterate, starting at B = I
  int iterations = 0;
  bool fell_back = false;     // non-finite objective, mixing reset to I

  double initial_objective() const { return trace.front(); }
  double final_objective() const { return trace.back(); }
};

/// Projected gradient descent on the orthogonal group with Armijo
/// backtracking and a sign-corrected QR retraction. Starts from B = I, or
/// from the signed identity matching the correspondences when that is lower.
BlockResult optimize_block(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& reference_basis,
                           const Eigen::MatrixXd& target_basis,
                           const CorrespondenceSet& correspondences, double alpha,
                           const OptimizerSettings& settings = {});

struct CouplingParams {
  double alpha = 1.0;
  int block_size = 10;
  int max_iterations = 200;
};

/// Spatial basis of one view of a super-ray.
struct CoupledBasis {
  enum class Source { Reference, Reused, Optimized, Uncoupled };

  ViewIndex view;
  Source source = Source::Uncoupled;
  Eigen::MatrixXd basis;   // n x n orthonormal
  Eigen::VectorXd values;  // eigenvalues of the view's own Laplacian
  int coupled_bands = 0;
  std::vector<BlockResult> blocks;
};

/// Number of leading eigenvectors optimised for a reference of `n0` pixels:
/// floor(n0 / 10) * 10.
inline int coupled_band_budget(int n0) { return (n0 / 10) * 10; }

/// Bases for every view of a super-ray. The first view (canonical order) is
/// the reference; views with an identical Laplacian reuse its basis, the
/// others are coupled to it block by block.
std::vector<CoupledBasis> couple_super_ray(const SuperRayMembers& members, double disparity,
                                           const CouplingParams& params);
std::vector<CoupledBasis> couple_super_ray(const SuperRaySegmentation& seg, int k,
                                           const CouplingParams& params);

}  // namespace lfgt
