#pragma once

#include <Eigen/Dense>

#include "lfgt/light_field.hpp"

namespace lfgt {

/// Largest Laplacian handed to the dense eigensolver.
inline constexpr int kMaxDenseVertices = 6500;

/// Orthonormal eigenvectors (columns) of a graph Laplacian with ascending
/// eigenvalues. Column b is band b.
struct EigenBasis {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;

  int size() const { return static_cast<int>(values.size()); }
};

/// Dense symmetric eigendecomposition with a deterministic basis:
/// within each eigenvalue cluster (gap < 1e-9) the basis is rebuilt by
/// ordered Gram-Schmidt of the canonical axes projected onto the cluster
/// subspace, then every column is signed so that its first entry with
/// magnitude above 1e-12 is positive.
///
/// Throws Error for non-symmetric or indefinite input (smallest eigenvalue
/// below -1e-6) and SizeError above kMaxDenseVertices.
EigenBasis diagonalize(const Eigen::MatrixXd& laplacian);

/// Applies the sign rule in place to every column.
void apply_sign_convention(Eigen::MatrixXd& basis);

/// Analysis: coefficients = basis^T * signal.
Eigen::VectorXd gft_forward(const Eigen::MatrixXd& basis, const Eigen::VectorXd& signal);
Eigen::VectorXd gft_forward(const EigenBasis& basis, const Eigen::VectorXd& signal);

/// Synthesis: signal = basis * coefficients.
Eigen::VectorXd gft_inverse(const Eigen::MatrixXd& basis, const Eigen::VectorXd& coefficients);
Eigen::VectorXd gft_inverse(const EigenBasis& basis, const Eigen::VectorXd& coefficients);

}  // namespace lfgt
