#include "lfgt/spectral.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace lfgt {
namespace {

constexpr double kClusterGap = 1e-9;
constexpr double kAxisResidual = 1e-6;
constexpr double kSignThreshold = 1e-12;

// Replaces the columns [first, first + count) of `vectors` with the
// Gram-Schmidt basis of the canonical axes projected onto their span.
void pin_cluster(Eigen::MatrixXd& vectors, int first, int count) {
  const Eigen::MatrixXd span = vectors.middleCols(first, count);
  Eigen::MatrixXd accepted(count, count);  // coordinates inside the span
  int found = 0;
  for (int axis = 0; axis < span.rows() && found < count; ++axis) {
    Eigen::VectorXd w = span.row(axis).transpose();
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < found; ++j) w -= accepted.col(j).dot(w) * accepted.col(j);
    const double norm = w.norm();
    if (norm > kAxisResidual) accepted.col(found++) = w / norm;
  }
  if (found < count) return;  // degenerate numerics; keep the solver's basis
  vectors.middleCols(first, count) = span * accepted;
}

}  // namespace

void apply_sign_convention(Eigen::MatrixXd& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j)
    for (Eigen::Index i = 0; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) <= kSignThreshold) continue;
      if (basis(i, j) < 0) basis.col(j) *= -1.0;
      break;
    }
}

EigenBasis diagonalize(const Eigen::MatrixXd& laplacian) {
  const Eigen::Index n = laplacian.rows();
  if (n != laplacian.cols()) throw Error("Laplacian must be square");
  if (n > kMaxDenseVertices)
    throw SizeError("graph with " + std::to_string(n) + " vertices exceeds the dense limit of " +
                    std::to_string(kMaxDenseVertices) + "; increase the super-ray count");
  EigenBasis out;
  if (n == 0) return out;
  if (!laplacian.allFinite()) throw Error("Laplacian has non-finite entries");
  const double scale = 1.0 + laplacian.cwiseAbs().maxCoeff();
  if ((laplacian - laplacian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error("Laplacian is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("eigensolver failed to converge");
  out.values = solver.eigenvalues();
  out.vectors = solver.eigenvectors();
  if (out.values(0) < -1e-6) throw Error("Laplacian is not positive semi-definite");

  for (Eigen::Index start = 0; start < n;) {
    Eigen::Index end = start + 1;
    while (end < n && out.values(end) - out.values(end - 1) < kClusterGap) ++end;
    if (end - start > 1) pin_cluster(out.vectors, static_cast<int>(start), static_cast<int>(end - start));
    start = end;
  }
  apply_sign_convention(out.vectors);
  return out;
}

Eigen::VectorXd gft_forward(const Eigen::MatrixXd& basis, const Eigen::VectorXd& signal) {
  if (basis.rows() != signal.size()) throw Error("signal length does not match basis");
  return basis.transpose() * signal;
}

Eigen::VectorXd gft_forward(const EigenBasis& basis, const Eigen::VectorXd& signal) {
  return gft_forward(basis.vectors, signal);
}

Eigen::VectorXd gft_inverse(const Eigen::MatrixXd& basis, const Eigen::VectorXd& coefficients) {
  if (basis.cols() != coefficients.size()) throw Error("coefficient length does not match basis");
  return basis * coefficients;
}

Eigen::VectorXd gft_inverse(const EigenBasis& basis, const Eigen::VectorXd& coefficients) {
  return gft_inverse(basis.vectors, coefficients);
}

}  // namespace lfgt
