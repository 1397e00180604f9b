#include "lfgt/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lfgt/graph.hpp"

namespace lfgt {
namespace {

Eigen::MatrixXd retract(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

// Objective restricted to one block with the correspondence rows already
// gathered: target_rows = G^T Ui, reference_rows = F^T U0.
struct BlockProblem {
  const Eigen::VectorXd& lambda;
  Eigen::MatrixXd target_rows;
  Eigen::MatrixXd reference_rows;
  double alpha;

  double value(const Eigen::MatrixXd& b) const {
    return diagonal_term(b, lambda) + alpha * (reference_rows - target_rows * b).squaredNorm();
  }

  Eigen::MatrixXd gradient(const Eigen::MatrixXd& b) const {
    return diagonal_term_gradient(b, lambda) +
           2.0 * alpha * target_rows.transpose() * (target_rows * b - reference_rows);
  }
};

}  // namespace

Eigen::MatrixXd CorrespondenceSet::F() const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(reference_size, size());
  for (int j = 0; j < size(); ++j) f(pairs[j].first, j) = 1.0;
  return f;
}

Eigen::MatrixXd CorrespondenceSet::G() const {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(target_size, size());
  for (int j = 0; j < size(); ++j) g(pairs[j].second, j) = 1.0;
  return g;
}

std::vector<int> farthest_point_sampling(const std::vector<Pixel>& points, int count) {
  const int n = static_cast<int>(points.size());
  count = std::min(count, n);
  std::vector<int> chosen;
  if (count <= 0) return chosen;

  double mean_r = 0.0, mean_c = 0.0;
  for (const Pixel& p : points) {
    mean_r += p.row;
    mean_c += p.col;
  }
  mean_r /= n;
  mean_c /= n;
  int seed = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double dr = points[i].row - mean_r, dc = points[i].col - mean_c;
    const double d = dr * dr + dc * dc;
    if (d < best) {
      best = d;
      seed = i;
    }
  }

  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  int next = seed;
  while (static_cast<int>(chosen.size()) < count) {
    chosen.push_back(next);
    taken[next] = 1;
    const Pixel& q = points[next];
    int arg = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double dr = points[i].row - q.row, dc = points[i].col - q.col;
      min_dist[i] = std::min(min_dist[i], dr * dr + dc * dc);
      if (min_dist[i] > far) {
        far = min_dist[i];
        arg = i;
      }
    }
    if (arg < 0) break;
    next = arg;
  }
  return chosen;
}

std::optional<CorrespondenceSet> build_correspondences(const std::vector<Pixel>& reference,
                                                       ViewIndex reference_view,
                                                       const std::vector<Pixel>& target,
                                                       ViewIndex target_view, double disparity,
                                                       int max_points) {
  if (reference.empty() || target.empty()) throw Error("correspondences need nonempty super-pixels");
  const int sr = disparity_shift(disparity, target_view.u - reference_view.u);
  const int sc = disparity_shift(disparity, target_view.v - reference_view.v);

  // Target lookup over its bounding box.
  int r0 = std::numeric_limits<int>::max(), c0 = r0, r1 = std::numeric_limits<int>::min(), c1 = r1;
  for (const Pixel& p : target) {
    r0 = std::min(r0, p.row);
    c0 = std::min(c0, p.col);
    r1 = std::max(r1, p.row);
    c1 = std::max(c1, p.col);
  }
  const int cols = c1 - c0 + 1;
  std::vector<int> lookup(static_cast<std::size_t>(r1 - r0 + 1) * cols, -1);
  for (std::size_t i = 0; i < target.size(); ++i)
    lookup[static_cast<std::size_t>(target[i].row - r0) * cols + (target[i].col - c0)] = static_cast<int>(i);

  std::vector<std::pair<int, int>> candidates;
  std::vector<Pixel> candidate_points;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const int r = reference[i].row + sr;
    const int c = reference[i].col + sc;
    if (r < r0 || r > r1 || c < c0 || c > c1) continue;
    const int j = lookup[static_cast<std::size_t>(r - r0) * cols + (c - c0)];
    if (j < 0) continue;
    candidates.emplace_back(static_cast<int>(i), j);
    candidate_points.push_back(reference[i]);
  }
  if (candidates.empty()) return std::nullopt;

  CorrespondenceSet out;
  out.reference_size = static_cast<int>(reference.size());
  out.target_size = static_cast<int>(target.size());
  if (static_cast<int>(candidates.size()) <= max_points) {
    out.pairs = std::move(candidates);
  } else {
    for (int idx : farthest_point_sampling(candidate_points, max_points))
      out.pairs.push_back(candidates[idx]);
    std::sort(out.pairs.begin(), out.pairs.end());
  }
  return out;
}

double diagonal_term(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda) {
  if (mixing.rows() != lambda.size() || mixing.cols() != lambda.size())
    throw Error("mixing matrix does not match eigenvalue count");
  const Eigen::MatrixXd m = mixing.transpose() * lambda.asDiagonal() * mixing;
  return (m - Eigen::MatrixXd(lambda.asDiagonal())).squaredNorm();
}

Eigen::MatrixXd diagonal_term_gradient(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda) {
  if (mixing.rows() != lambda.size() || mixing.cols() != lambda.size())
    throw Error("mixing matrix does not match eigenvalue count");
  const Eigen::MatrixXd lb = lambda.asDiagonal() * mixing;
  return 4.0 * (lb * (mixing.transpose() * lb) - lb * lambda.asDiagonal());
}

namespace {
void check_coherence_dims(const Eigen::MatrixXd& mixing, const Eigen::MatrixXd& u0,
                          const Eigen::MatrixXd& ui, const Eigen::MatrixXd& f,
                          const Eigen::MatrixXd& g) {
  if (f.rows() != u0.rows() || g.rows() != ui.rows() || f.cols() != g.cols() ||
      mixing.rows() != ui.cols() || mixing.cols() != u0.cols())
    throw Error("coupling term dimension mismatch");
}
}  // namespace

double coherence_term(const Eigen::MatrixXd& mixing, const Eigen::MatrixXd& reference_basis,
                      const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                      const Eigen::MatrixXd& g) {
  check_coherence_dims(mixing, reference_basis, target_basis, f, g);
  return (f.transpose() * reference_basis - g.transpose() * target_basis * mixing).squaredNorm();
}

Eigen::MatrixXd coherence_term_gradient(const Eigen::MatrixXd& mixing,
                                        const Eigen::MatrixXd& reference_basis,
                                        const Eigen::MatrixXd& target_basis,
                                        const Eigen::MatrixXd& f, const Eigen::MatrixXd& g) {
  check_coherence_dims(mixing, reference_basis, target_basis, f, g);
  const Eigen::MatrixXd gu = g.transpose() * target_basis;
  return 2.0 * gu.transpose() * (gu * mixing - f.transpose() * reference_basis);
}

double coupling_objective(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda,
                          const Eigen::MatrixXd& reference_basis,
                          const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                          const Eigen::MatrixXd& g, double alpha) {
  if (alpha < 0) throw Error("alpha must be non-negative");
  return diagonal_term(mixing, lambda) +
         alpha * coherence_term(mixing, reference_basis, target_basis, f, g);
}

Eigen::MatrixXd coupling_gradient(const Eigen::MatrixXd& mixing, const Eigen::VectorXd& lambda,
                                  const Eigen::MatrixXd& reference_basis,
                                  const Eigen::MatrixXd& target_basis, const Eigen::MatrixXd& f,
                                  const Eigen::MatrixXd& g, double alpha) {
  if (alpha < 0) throw Error("alpha must be non-negative");
  return diagonal_term_gradient(mixing, lambda) +
         alpha * coherence_term_gradient(mixing, reference_basis, target_basis, f, g);
}

BlockResult optimize_block(const Eigen::VectorXd& lambda, const Eigen::MatrixXd& reference_basis,
                           const Eigen::MatrixXd& target_basis,
                           const CorrespondenceSet& correspondences, double alpha,
                           const OptimizerSettings& settings) {
  const Eigen::Index k = lambda.size();
  if (k < 1) throw Error("block size must be at least 1");
  if (reference_basis.cols() != k || target_basis.cols() != k)
    throw Error("block bases do not match eigenvalue count");
  if (reference_basis.rows() != correspondences.reference_size ||
      target_basis.rows() != correspondences.target_size)
    throw Error("block bases do not match correspondence sizes");
  if (alpha < 0) throw Error("alpha must be non-negative");

  BlockProblem problem{lambda, Eigen::MatrixXd(correspondences.size(), k),
                       Eigen::MatrixXd(correspondences.size(), k), alpha};
  for (int j = 0; j < correspondences.size(); ++j) {
    problem.reference_rows.row(j) = reference_basis.row(correspondences.pairs[j].first);
    problem.target_rows.row(j) = target_basis.row(correspondences.pairs[j].second);
  }

  BlockResult result;
  result.mixing = Eigen::MatrixXd::Identity(k, k);
  double value = problem.value(result.mixing);
  result.trace.push_back(value);
  if (!std::isfinite(value)) {
    result.fell_back = true;
    return result;
  }

  // Per-view sign rules disagree on shapes that differ; a signed diagonal keeps the
  // eigenvalue term at zero, and the descent below cannot flip a single column.
  Eigen::MatrixXd start = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index j = 0; j < k; ++j)
    if (problem.reference_rows.col(j).dot(problem.target_rows.col(j)) < 0) start(j, j) = -1.0;
  if (!start.isIdentity()) {
    const double start_value = problem.value(start);
    if (start_value < value) {
      result.mixing = start;
      value = start_value;
      result.trace.push_back(value);
    }
  }

  double step = 1.0;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    const Eigen::MatrixXd& b = result.mixing;
    const Eigen::MatrixXd grad = problem.gradient(b);
    const Eigen::MatrixXd btg = b.transpose() * grad;
    const Eigen::MatrixXd tangent = grad - b * (0.5 * (btg + btg.transpose()));
    const double tangent_sq = tangent.squaredNorm();
    if (std::sqrt(tangent_sq) < settings.gradient_tolerance * (1.0 + std::abs(value))) break;

    bool accepted = false;
    Eigen::MatrixXd candidate;
    double candidate_value = 0.0;
    for (int bt = 0; bt < settings.max_backtracks; ++bt) {
      candidate = retract(b - step * tangent);
      candidate_value = problem.value(candidate);
      if (!std::isfinite(candidate_value)) {
        result.mixing = Eigen::MatrixXd::Identity(k, k);
        result.trace.push_back(result.trace.front());
        result.fell_back = true;
        return result;
      }
      if (candidate_value <= value - settings.armijo * step * tangent_sq) {
        accepted = true;
        break;
      }
      step *= settings.shrink;
    }
    if (!accepted) break;

    result.mixing = std::move(candidate);
    value = candidate_value;
    result.trace.push_back(value);
    result.iterations = iter + 1;
    step = std::min(1.0, step * 2.0);

    const std::size_t n = result.trace.size();
    if (n > static_cast<std::size_t>(settings.stall_window)) {
      const double past = result.trace[n - 1 - settings.stall_window];
      if (past - value <= settings.stall_decrease * std::abs(past)) break;
    }
  }
  return result;
}

std::vector<CoupledBasis> couple_super_ray(const SuperRaySegmentation& seg, int k,
                                           const CouplingParams& params) {
  if (k < 0 || k >= seg.count) throw Error("super-ray label out of range");
  return couple_super_ray(members_of(seg, k), seg.median_disparity[k], params);
}

std::vector<CoupledBasis> couple_super_ray(const SuperRayMembers& members, double disparity,
                                           const CouplingParams& params) {
  if (members.views.empty()) throw Error("super-ray is empty in every view");
  if (params.block_size < 1) throw Error("coupling block size must be at least 1");
  if (params.alpha < 0) throw Error("alpha must be non-negative");
  OptimizerSettings settings;
  settings.max_iterations = params.max_iterations;

  const auto& ref_view = members.views.front();
  const Eigen::MatrixXd ref_laplacian = build_spatial_graph(ref_view.pixels, ref_view.view).laplacian();
  const EigenBasis ref_basis = diagonalize(ref_laplacian);
  const int n0 = ref_basis.size();

  std::vector<CoupledBasis> out;
  out.reserve(members.views.size());
  out.push_back({ref_view.view, CoupledBasis::Source::Reference, ref_basis.vectors,
                 ref_basis.values, 0, {}});

  for (std::size_t i = 1; i < members.views.size(); ++i) {
    const auto& vp = members.views[i];
    const Eigen::MatrixXd laplacian = build_spatial_graph(vp.pixels, vp.view).laplacian();
    CoupledBasis cb;
    cb.view = vp.view;
    if (laplacian.rows() == ref_laplacian.rows() && laplacian == ref_laplacian) {
      cb.source = CoupledBasis::Source::Reused;
      cb.basis = ref_basis.vectors;
      cb.values = ref_basis.values;
      out.push_back(std::move(cb));
      continue;
    }
    EigenBasis own = diagonalize(laplacian);
    cb.basis = std::move(own.vectors);
    cb.values = std::move(own.values);
    cb.source = CoupledBasis::Source::Uncoupled;

    const int ni = static_cast<int>(cb.values.size());
    const int budget = std::min(coupled_band_budget(n0), ni);
    const auto corr = budget > 0 ? build_correspondences(ref_view.pixels, ref_view.view, vp.pixels,
                                                         vp.view, disparity)
                                 : std::nullopt;
    if (corr) {
      cb.source = CoupledBasis::Source::Optimized;
      cb.coupled_bands = budget;
      for (int start = 0; start < budget; start += params.block_size) {
        const int len = std::min(params.block_size, budget - start);
        BlockResult block = optimize_block(cb.values.segment(start, len),
                                           ref_basis.vectors.middleCols(start, len),
                                           cb.basis.middleCols(start, len), *corr, params.alpha,
                                           settings);
        cb.basis.middleCols(start, len) = cb.basis.middleCols(start, len) * block.mixing;
        cb.blocks.push_back(std::move(block));
      }
    }
    out.push_back(std::move(cb));
  }
  return out;
}

}  // namespace lfgt
