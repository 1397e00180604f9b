#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "lfgt/coupling.hpp"
#include "lfgt/graph.hpp"
#include "support.hpp"

using namespace lfgt;

namespace {

std::vector<Pixel> rectangle(int r0, int c0, int rows, int cols) {
  std::vector<Pixel> out;
  for (int c = c0; c < c0 + cols; ++c)
    for (int r = r0; r < r0 + rows; ++r) out.push_back({r, c});
  return out;
}

// Column-major order, as the members lists are stored.
void sort_canonical(std::vector<Pixel>& px) {
  std::sort(px.begin(), px.end(), [](const Pixel& a, const Pixel& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
}

double sq_dist(const Pixel& a, const Pixel& b) {
  const double dr = a.row - b.row, dc = a.col - b.col;
  return dr * dr + dc * dc;
}

double min_pairwise(const std::vector<Pixel>& pts, const std::vector<int>& idx) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) best = std::min(best, sq_dist(pts[idx[i]], pts[idx[j]]));
  return best;
}

// Straightforward greedy rule: seed nearest the centroid, then the point
// with the largest distance to the chosen set, lowest index on ties.
std::vector<int> greedy_oracle(const std::vector<Pixel>& pts, int count) {
  const int n = static_cast<int>(pts.size());
  double mr = 0, mc = 0;
  for (const auto& p : pts) {
    mr += p.row;
    mc += p.col;
  }
  mr /= n;
  mc /= n;
  std::vector<int> chosen;
  int seed = 0;
  for (int i = 1; i < n; ++i) {
    const double di = (pts[i].row - mr) * (pts[i].row - mr) + (pts[i].col - mc) * (pts[i].col - mc);
    const double ds = (pts[seed].row - mr) * (pts[seed].row - mr) + (pts[seed].col - mc) * (pts[seed].col - mc);
    if (di < ds) seed = i;
  }
  chosen.push_back(seed);
  while (static_cast<int>(chosen.size()) < std::min(count, n)) {
    int arg = -1;
    double far = -1;
    for (int i = 0; i < n; ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (int c : chosen) d = std::min(d, sq_dist(pts[i], pts[c]));
      if (d > far) {
        far = d;
        arg = i;
      }
    }
    chosen.push_back(arg);
  }
  return chosen;
}

// Best achievable minimum pairwise distance over every `count`-subset.
double exhaustive_dispersion(const std::vector<Pixel>& pts, int count) {
  const int n = static_cast<int>(pts.size());
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  std::fill(mask.begin(), mask.begin() + count, 1);
  double best = 0;
  do {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask[static_cast<std::size_t>(i)]) idx.push_back(i);
    best = std::max(best, min_pairwise(pts, idx));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

Eigen::MatrixXd one_hot(std::mt19937_64& rng, int rows, int cols) {
  std::vector<int> perm(static_cast<std::size_t>(rows));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int j = 0; j < cols; ++j) m(perm[static_cast<std::size_t>(j)], j) = 1.0;
  return m;
}

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

template <typename F>
Eigen::MatrixXd central_difference(const Eigen::MatrixXd& b, F&& f, double h = 1e-6) {
  Eigen::MatrixXd grad(b.rows(), b.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      Eigen::MatrixXd p = b, m = b;
      p(i, j) += h;
      m(i, j) -= h;
      grad(i, j) = (f(p) - f(m)) / (2 * h);
    }
  return grad;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1e-12, std::max(a.norm(), b.norm()));
}

// Random connected shape of `n` pixels grown from the origin.
std::vector<Pixel> random_shape(std::mt19937_64& rng, int n) {
  std::set<Pixel> shape{{0, 0}};
  const int dr[4] = {1, -1, 0, 0}, dc[4] = {0, 0, 1, -1};
  while (static_cast<int>(shape.size()) < n) {
    auto it = shape.begin();
    std::advance(it, static_cast<long>(rng() % shape.size()));
    const int k = static_cast<int>(rng() % 4);
    shape.insert({it->row + dr[k], it->col + dc[k]});
  }
  std::vector<Pixel> out(shape.begin(), shape.end());
  for (auto& p : out) {
    p.row += 20;
    p.col += 20;
  }
  sort_canonical(out);
  return out;
}

bool connected(const std::vector<Pixel>& px) {
  const LocalGraph g = build_spatial_graph(px);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.laplacian());
  return es.eigenvalues()(1) > 1e-9;
}

}  // namespace

TEST_CASE("identical shapes at zero disparity pair every vertex with itself") {
  SUBCASE("small") {
    const auto px = rectangle(0, 0, 3, 4);
    const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
    CHECK(set.size() == 12);
    for (const auto& [a, b] : set.pairs) CHECK(a == b);
  }
  SUBCASE("large") {
    const auto px = rectangle(0, 0, 5, 6);
    const auto set = build_correspondences(px, {0, 0}, px, {1, 0}, 0.0).value();
    CHECK(set.size() == 15);
    for (const auto& [a, b] : set.pairs) CHECK(a == b);
  }
}

TEST_CASE("one disappearing and one appearing vertex: pairs cover the shared vertices") {
  auto ref = rectangle(0, 0, 2, 3);
  auto target = ref;
  ref.push_back({2, 0});     // disappears
  target.push_back({0, 3});  // appears
  sort_canonical(ref);
  sort_canonical(target);
  const auto set = build_correspondences(ref, {0, 0}, target, {0, 1}, 0.0).value();
  CHECK(set.size() == 6);
  for (const auto& [a, b] : set.pairs) CHECK(ref[static_cast<std::size_t>(a)] == target[static_cast<std::size_t>(b)]);
  const Eigen::MatrixXd f = set.F(), g = set.G();
  CHECK(f.rows() == 7);
  CHECK(g.rows() == 7);
  CHECK(f.colwise().sum() == Eigen::RowVectorXd::Ones(6));
  CHECK(f.rowwise().sum().maxCoeff() == 1.0);
  CHECK(g.rowwise().sum().maxCoeff() == 1.0);
}

TEST_CASE("correspondences follow the disparity shift") {
  const auto ref = rectangle(5, 5, 3, 3);
  const auto target = rectangle(3, 5, 3, 3);  // two rows up in view (2,0) with d = 1
  const auto set = build_correspondences(ref, {0, 0}, target, {2, 0}, 1.0).value();
  CHECK(set.size() == 9);
  for (const auto& [a, b] : set.pairs) {
    CHECK(target[static_cast<std::size_t>(b)].row == ref[static_cast<std::size_t>(a)].row - 2);
    CHECK(target[static_cast<std::size_t>(b)].col == ref[static_cast<std::size_t>(a)].col);
  }
  CHECK_FALSE(build_correspondences(ref, {0, 0}, rectangle(20, 20, 2, 2), {0, 1}, 0.0).has_value());
}

TEST_CASE("40-pixel overlap is thinned to exactly 15 pairs") {
  const auto px = rectangle(0, 0, 5, 8);
  const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
  CHECK(set.size() == 15);
  std::set<int> refs, targets;
  for (const auto& [a, b] : set.pairs) {
    refs.insert(a);
    targets.insert(b);
  }
  CHECK(refs.size() == 15);
  CHECK(targets.size() == 15);
}

TEST_CASE("farthest point sampling against greedy and exhaustive oracles") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 30; ++t) {
    const int n = 16 + static_cast<int>(rng() % 3);
    std::set<Pixel> unique;
    while (static_cast<int>(unique.size()) < n)
      unique.insert({static_cast<int>(rng() % 9), static_cast<int>(rng() % 9)});
    std::vector<Pixel> pts(unique.begin(), unique.end());
    std::shuffle(pts.begin(), pts.end(), rng);
    const auto chosen = farthest_point_sampling(pts, 15);
    CHECK(chosen == greedy_oracle(pts, 15));
    CHECK(std::set<int>(chosen.begin(), chosen.end()).size() == 15);
    // greedy dispersion is within a factor 2 of the optimum (distance, not squared)
    const double got = std::sqrt(min_pairwise(pts, chosen));
    const double best = std::sqrt(exhaustive_dispersion(pts, 15));
    CHECK(got >= best / 2 - 1e-12);
    CHECK(got <= best + 1e-12);
  }
  // on a line the greedy choice is optimal
  std::vector<Pixel> line;
  for (int c = 0; c < 17; ++c) line.push_back({0, c});
  const auto chosen = farthest_point_sampling(line, 3);
  CHECK(chosen == std::vector<int>{8, 0, 16});
}

TEST_CASE("objective examples") {
  std::mt19937_64 rng(6);
  SUBCASE("identity mixing with identical Laplacians and identity correspondences is 0") {
    const auto px = rectangle(0, 0, 3, 3);
    const EigenBasis b = diagonalize(build_spatial_graph(px).laplacian());
    const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
    CHECK(coupling_objective(Eigen::MatrixXd::Identity(9, 9), b.values, b.vectors, b.vectors, set.F(),
                             set.G(), 1.0) == doctest::Approx(0.0));
  }
  SUBCASE("signed identity commutes with the eigenvalues") {
    Eigen::VectorXd lambda(4);
    lambda << 0, 1, 2.5, 4;
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(4, 4);
    b(1, 1) = -1;
    b(3, 3) = -1;
    CHECK(diagonal_term(b, lambda) == 0.0);
    CHECK(diagonal_term_gradient(b, lambda).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(diagonal_term_gradient(Eigen::MatrixXd::Identity(4, 4), lambda).isZero());
    // block rotation inside a repeated eigenvalue
    lambda << 0, 2, 2, 4;
    b = Eigen::MatrixXd::Identity(4, 4);
    b.block(1, 1, 2, 2) << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
    CHECK(diagonal_term(b, lambda) < 1e-28);
    CHECK(diagonal_term_gradient(b, lambda).cwiseAbs().maxCoeff() < 1e-13);
  }
  SUBCASE("random 6x6 instance matches a direct evaluation") {
    const Eigen::MatrixXd b = gaussian(rng, 6, 6);
    Eigen::VectorXd lambda = gaussian(rng, 6, 1).cwiseAbs();
    const Eigen::MatrixXd u0 = gaussian(rng, 9, 6), ui = gaussian(rng, 8, 6);
    const Eigen::MatrixXd f = one_hot(rng, 9, 5), g = one_hot(rng, 8, 5);
    double first = 0, second = 0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        double s = 0;
        for (int m = 0; m < 6; ++m) s += b(m, i) * lambda(m) * b(m, j);
        s -= i == j ? lambda(i) : 0.0;
        first += s * s;
      }
    for (int p = 0; p < 5; ++p)
      for (int j = 0; j < 6; ++j) {
        double s = 0;
        for (int r = 0; r < 9; ++r) s += f(r, p) * u0(r, j);
        for (int r = 0; r < 8; ++r)
          for (int m = 0; m < 6; ++m) s -= g(r, p) * ui(r, m) * b(m, j);
        second += s * s;
      }
    CHECK(coupling_objective(b, lambda, u0, ui, f, g, 0.7) == doctest::Approx(first + 0.7 * second).epsilon(1e-12));
    CHECK_THROWS(coupling_objective(b, lambda, u0, ui, f, g, -1.0));
    CHECK_THROWS(coherence_term(b, u0, ui, g, g));
  }
}

// The coherence gradient is 2 Ui^T G (G^T Ui B - F^T U0). F is n0 x p and U0
// is n0 x k, so only the transposed form F^T U0 (p x k) matches G^T Ui B;
// the finite differences below confirm it, and reject the untransposed
// F U0 even in the square case where it type-checks.
TEST_CASE("gradients agree with central finite differences") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const int k = 3 + static_cast<int>(rng() % 6);
    const Eigen::MatrixXd b = gaussian(rng, k, k);
    const Eigen::VectorXd lambda = gaussian(rng, k, 1).cwiseAbs() * 3.0;
    const Eigen::MatrixXd fd = central_difference(b, [&](const Eigen::MatrixXd& x) { return diagonal_term(x, lambda); });
    CHECK(relative_error(diagonal_term_gradient(b, lambda), fd) < 1e-5);
  }
  for (int t = 0; t < 20; ++t) {
    const int k = 3 + static_cast<int>(rng() % 6);
    const int n0 = k + 2 + static_cast<int>(rng() % 5), ni = k + 1 + static_cast<int>(rng() % 5);
    const int p = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(std::min(n0, ni)));
    const Eigen::MatrixXd b = gaussian(rng, k, k);
    const Eigen::MatrixXd u0 = gaussian(rng, n0, k), ui = gaussian(rng, ni, k);
    const Eigen::MatrixXd f = one_hot(rng, n0, p), g = one_hot(rng, ni, p);
    const Eigen::MatrixXd fd =
        central_difference(b, [&](const Eigen::MatrixXd& x) { return coherence_term(x, u0, ui, f, g); });
    CHECK(relative_error(coherence_term_gradient(b, u0, ui, f, g), fd) < 1e-5);
  }
  // full objective
  for (int t = 0; t < 5; ++t) {
    const int k = 5;
    const Eigen::MatrixXd b = gaussian(rng, k, k);
    const Eigen::VectorXd lambda = gaussian(rng, k, 1).cwiseAbs();
    const Eigen::MatrixXd u0 = gaussian(rng, 7, k), ui = gaussian(rng, 8, k);
    const Eigen::MatrixXd f = one_hot(rng, 7, 4), g = one_hot(rng, 8, 4);
    const Eigen::MatrixXd fd = central_difference(
        b, [&](const Eigen::MatrixXd& x) { return coupling_objective(x, lambda, u0, ui, f, g, 1.3); });
    CHECK(relative_error(coupling_gradient(b, lambda, u0, ui, f, g, 1.3), fd) < 1e-5);
  }
  // square case: the untransposed variant disagrees
  {
    const int n = 6, k = 4;
    const Eigen::MatrixXd b = gaussian(rng, k, k);
    const Eigen::MatrixXd u0 = gaussian(rng, n, k), ui = gaussian(rng, n, k);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) f((j + 1) % n, j) = 1.0;  // cyclic shift, F != F^T
    const Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd fd =
        central_difference(b, [&](const Eigen::MatrixXd& x) { return coherence_term(x, u0, ui, f, g); });
    const Eigen::MatrixXd gu = g.transpose() * ui;
    const Eigen::MatrixXd untransposed = 2.0 * gu.transpose() * (gu * b - f * u0);
    CHECK(relative_error(untransposed, fd) > 1e-2);
    CHECK(relative_error(coherence_term_gradient(b, u0, ui, f, g), fd) < 1e-5);
  }
}

TEST_CASE("optimiser on identical shapes stays at the zero objective") {
  const auto px = rectangle(0, 0, 4, 4);
  const EigenBasis b = diagonalize(build_spatial_graph(px).laplacian());
  const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
  const BlockResult r = optimize_block(b.values.head(10), b.vectors.leftCols(10), b.vectors.leftCols(10), set, 1.0);
  CHECK(r.initial_objective() < 1e-20);
  CHECK(r.final_objective() < 1e-20);
  CHECK((r.mixing - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("optimiser undoes flipped columns with a signed identity") {
  const auto px = rectangle(0, 0, 4, 4);
  const EigenBasis b = diagonalize(build_spatial_graph(px).laplacian());
  const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
  Eigen::MatrixXd flipped = b.vectors.leftCols(10);
  flipped.col(1) *= -1.0;
  flipped.col(6) *= -1.0;
  const BlockResult r = optimize_block(b.values.head(10), b.vectors.leftCols(10), flipped, set, 1.0);
  CHECK(r.initial_objective() > 1e-3);
  CHECK(r.final_objective() < 1e-20);
  Eigen::MatrixXd expected = Eigen::MatrixXd::Identity(10, 10);
  expected(1, 1) = expected(6, 6) = -1.0;
  CHECK((r.mixing - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("optimiser decreases the objective on near-isometric 12-node pairs") {
  std::mt19937_64 rng(12);
  int instances = 0;
  double total_ratio = 0.0;
  while (instances < 20) {
    const auto ref = random_shape(rng, 12);
    // move one pixel: drop a random vertex, add a random neighbour
    auto target = ref;
    target.erase(target.begin() + static_cast<long>(rng() % target.size()));
    const Pixel base = target[rng() % target.size()];
    const int k = static_cast<int>(rng() % 4);
    const Pixel extra{base.row + (k == 0) - (k == 1), base.col + (k == 2) - (k == 3)};
    if (std::find(target.begin(), target.end(), extra) != target.end()) continue;
    if (std::find(ref.begin(), ref.end(), extra) != ref.end()) continue;
    target.push_back(extra);
    sort_canonical(target);
    if (!connected(target)) continue;
    const EigenBasis b0 = diagonalize(build_spatial_graph(ref).laplacian());
    const EigenBasis bi = diagonalize(build_spatial_graph(target).laplacian());
    const auto set = build_correspondences(ref, {0, 0}, target, {0, 1}, 0.0).value();
    const BlockResult r = optimize_block(bi.values.head(10), b0.vectors.leftCols(10), bi.vectors.leftCols(10), set, 1.0);
    CHECK(r.final_objective() <= r.initial_objective());
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i] <= r.trace[i - 1]);
    CHECK((r.mixing.transpose() * r.mixing - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK_FALSE(r.fell_back);
    if (r.initial_objective() > 1e-9) {
      total_ratio += r.final_objective() / r.initial_objective();
      ++instances;
    }
  }
  // regression baseline: on average the optimum is below half of the B = I value
  CHECK(total_ratio / instances <= 0.5);
}

TEST_CASE("non-finite objective falls back to the identity") {
  const auto px = rectangle(0, 0, 2, 2);
  const EigenBasis b = diagonalize(build_spatial_graph(px).laplacian());
  const auto set = build_correspondences(px, {0, 0}, px, {0, 1}, 0.0).value();
  Eigen::VectorXd lambda = b.values;
  lambda(1) = std::numeric_limits<double>::quiet_NaN();
  const BlockResult r = optimize_block(lambda, b.vectors, b.vectors, set, 1.0);
  CHECK(r.fell_back);
  CHECK(r.mixing == Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("couple_super_ray") {
  SUBCASE("coherent super-ray reuses the reference basis bit for bit") {
    SuperRayMembers m;
    for (const auto& w : canonical_views(2, 2)) m.views.push_back({w, rectangle(10 - w.u, 10 - w.v, 4, 5)});
    const auto bases = couple_super_ray(m, 1.0, {});
    REQUIRE(bases.size() == 4);
    CHECK(bases[0].source == CoupledBasis::Source::Reference);
    for (std::size_t i = 1; i < 4; ++i) {
      CHECK(bases[i].source == CoupledBasis::Source::Reused);
      CHECK(bases[i].basis == bases[0].basis);
    }
  }
  SUBCASE("n0 = 47 couples 40 bands in blocks of 10") {
    auto ref = rectangle(0, 0, 6, 8);
    ref.erase(std::find(ref.begin(), ref.end(), Pixel{5, 7}));
    const auto target = rectangle(0, 0, 6, 8);
    SuperRayMembers m;
    m.views.push_back({{0, 0}, ref});
    m.views.push_back({{0, 1}, target});
    const auto bases = couple_super_ray(m, 0.0, {1.0, 10, 200});
    REQUIRE(bases.size() == 2);
    CHECK(coupled_band_budget(47) == 40);
    CHECK(bases[1].source == CoupledBasis::Source::Optimized);
    CHECK(bases[1].coupled_bands == 40);
    CHECK(bases[1].blocks.size() == 4);
    const Eigen::MatrixXd& u = bases[1].basis;
    CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(48, 48)).cwiseAbs().maxCoeff() <= 1e-6);
    // own eigenvalues are kept, uncoupled tail is the plain eigenbasis
    const EigenBasis own = diagonalize(build_spatial_graph(target).laplacian());
    CHECK((bases[1].values - own.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK(u.rightCols(8) == own.vectors.rightCols(8));
    for (const auto& block : bases[1].blocks) CHECK(block.final_objective() <= block.initial_objective());
  }
  SUBCASE("disjoint shapes stay uncoupled") {
    SuperRayMembers m;
    m.views.push_back({{0, 0}, rectangle(0, 0, 4, 4)});
    m.views.push_back({{0, 1}, rectangle(20, 20, 3, 5)});
    const auto bases = couple_super_ray(m, 0.0, {});
    CHECK(bases[1].source == CoupledBasis::Source::Uncoupled);
    CHECK(bases[1].blocks.empty());
  }
  SUBCASE("parameter validation") {
    SuperRayMembers m;
    CHECK_THROWS(couple_super_ray(m, 0.0, {}));
    m.views.push_back({{0, 0}, rectangle(0, 0, 2, 2)});
    CHECK_THROWS(couple_super_ray(m, 0.0, {1.0, 0, 10}));
    CHECK_THROWS(couple_super_ray(m, 0.0, {-1.0, 10, 10}));
  }
}

TEST_CASE("one appearing pixel: band-1 coefficients correlate better across views with coupling") {
  auto ref = rectangle(0, 0, 6, 8);
  ref.erase(std::find(ref.begin(), ref.end(), Pixel{5, 7}));
  const auto target = rectangle(0, 0, 6, 8);
  SuperRayMembers m;
  m.views.push_back({{0, 0}, ref});
  m.views.push_back({{0, 1}, target});
  const auto coupled = couple_super_ray(m, 0.0, {1.0, 10, 200});
  const EigenBasis plain = diagonalize(build_spatial_graph(target).laplacian());

  // smooth random signals observed in both views at the same positions
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::vector<double> a, with, without;
  for (int s = 0; s < 200; ++s) {
    const double gr = g(rng), gc = g(rng), cross = 0.3 * g(rng);
    auto value = [&](const Pixel& p) { return gr * p.row + gc * p.col + cross * p.row * p.col + 0.2 * g(rng); };
    Eigen::VectorXd f0(static_cast<Eigen::Index>(ref.size())), f1(static_cast<Eigen::Index>(target.size()));
    for (std::size_t i = 0; i < target.size(); ++i) f1(static_cast<Eigen::Index>(i)) = value(target[i]);
    for (std::size_t i = 0; i < ref.size(); ++i)
      f0(static_cast<Eigen::Index>(i)) = f1(static_cast<Eigen::Index>(std::find(target.begin(), target.end(), ref[i]) - target.begin()));
    a.push_back(coupled[0].basis.col(1).dot(f0));
    with.push_back(coupled[1].basis.col(1).dot(f1));
    without.push_back(plain.vectors.col(1).dot(f1));
  }
  auto pearson = [](const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n, my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
  };
  const double rho_with = pearson(a, with), rho_without = pearson(a, without);
  MESSAGE("band-1 correlation coupled " << rho_with << ", uncoupled " << rho_without);
  CHECK(rho_with > rho_without);
}
