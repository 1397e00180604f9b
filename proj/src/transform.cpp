#include "lfgt/transform.hpp"

#include <algorithm>
#include <cmath>

#include "lfgt/graph.hpp"
#include "lfgt/hash.hpp"
#include "lfgt/parallel.hpp"
#include "lfgt/spectral.hpp"

namespace lfgt {

std::string to_string(TransformMode mode) {
  switch (mode) {
    case TransformMode::NonSeparable: return "nonseparable";
    case TransformMode::Separable: return "separable";
    case TransformMode::SeparableOptimized: return "separable-opt";
  }
  return "unknown";
}

TransformMode parse_transform_mode(const std::string& text) {
  if (text == "nonseparable") return TransformMode::NonSeparable;
  if (text == "separable") return TransformMode::Separable;
  if (text == "separable-opt") return TransformMode::SeparableOptimized;
  throw Error("unknown transform mode '" + text + "' (expected nonseparable, separable or separable-opt)");
}

std::size_t CoefficientTensor::coefficient_count() const {
  std::size_t n = 0;
  for (const auto& ray : rays)
    for (const auto& band : ray) n += band.size();
  return n;
}

double CoefficientTensor::energy() const {
  double e = 0.0;
  for (const auto& ray : rays)
    for (const auto& band : ray)
      for (double c : band) e += c * c;
  return e;
}

int SuperRayTransform::band_count() const {
  if (mode == TransformMode::NonSeparable) return static_cast<int>(joint.cols());
  return static_cast<int>(band_views.size());
}

std::size_t SuperRayTransform::vertex_count() const {
  std::size_t n = 0;
  for (int s : view_sizes) n += static_cast<std::size_t>(s);
  return n;
}

SuperRayTransform build_super_ray_transform(const SuperRaySegmentation& seg, int k,
                                            const SuperRayMembers& members, TransformMode mode,
                                            const CouplingParams& coupling) {
  if (members.views.empty()) throw Error("super-ray " + std::to_string(k) + " is empty in every view");
  SuperRayTransform t;
  t.mode = mode;
  for (const auto& vp : members.views) {
    t.views.push_back(vp.view);
    t.view_sizes.push_back(static_cast<int>(vp.pixels.size()));
  }

  if (mode == TransformMode::NonSeparable) {
    const std::size_t n = members.total_size();
    if (n > static_cast<std::size_t>(kMaxDenseVertices))
      throw SizeError("super-ray " + std::to_string(k) + " has " + std::to_string(n) +
                      " vertices, above the dense limit of " + std::to_string(kMaxDenseVertices) +
                      "; increase the super-ray count");
    t.joint = diagonalize(build_nonseparable_graph(seg, k, members).laplacian()).vectors;
    return t;
  }

  if (mode == TransformMode::SeparableOptimized) {
    t.coupling = couple_super_ray(members, seg.median_disparity[static_cast<std::size_t>(k)], coupling);
    for (auto& cb : t.coupling) {
      t.spatial.push_back(cb.basis);
      cb.basis.resize(0, 0);  // keep only the diagnostics
    }
  } else {
    const auto& ref = members.views.front();
    const Eigen::MatrixXd ref_laplacian = build_spatial_graph(ref.pixels, ref.view).laplacian();
    const Eigen::MatrixXd ref_basis = diagonalize(ref_laplacian).vectors;
    t.spatial.push_back(ref_basis);
    for (std::size_t i = 1; i < members.views.size(); ++i) {
      const auto& vp = members.views[i];
      const Eigen::MatrixXd laplacian = build_spatial_graph(vp.pixels, vp.view).laplacian();
      if (laplacian.rows() == ref_laplacian.rows() && laplacian == ref_laplacian)
        t.spatial.push_back(ref_basis);
      else
        t.spatial.push_back(diagonalize(laplacian).vectors);
    }
  }

  const int bands = *std::max_element(t.view_sizes.begin(), t.view_sizes.end());
  t.band_views.resize(static_cast<std::size_t>(bands));
  t.band_basis.resize(static_cast<std::size_t>(bands));
  for (int b = 0; b < bands; ++b) {
    auto& present = t.band_views[static_cast<std::size_t>(b)];
    for (std::size_t i = 0; i < t.views.size(); ++i)
      if (t.view_sizes[i] > b) present.push_back(static_cast<int>(i));
    // Membership only shrinks with b, so an angular basis is shared by a run
    // of consecutive bands.
    if (b > 0 && present == t.band_views[static_cast<std::size_t>(b - 1)]) {
      t.band_basis[static_cast<std::size_t>(b)] = t.band_basis[static_cast<std::size_t>(b - 1)];
      continue;
    }
    std::vector<ViewIndex> views;
    for (int i : present) views.push_back(t.views[static_cast<std::size_t>(i)]);
    t.angular.push_back(diagonalize(build_angular_graph(views).laplacian()).vectors);
    t.band_basis[static_cast<std::size_t>(b)] = static_cast<int>(t.angular.size()) - 1;
  }
  return t;
}

std::vector<Eigen::VectorXd> gather_signals(const LightField& lf, const SuperRayMembers& members) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(members.views.size());
  for (const auto& vp : members.views) {
    const Image& img = lf.view(vp.view);
    Eigen::VectorXd f(static_cast<Eigen::Index>(vp.pixels.size()));
    for (std::size_t i = 0; i < vp.pixels.size(); ++i)
      f(static_cast<Eigen::Index>(i)) = img(vp.pixels[i].row, vp.pixels[i].col);
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

void check_signals(const SuperRayTransform& t, const std::vector<Eigen::VectorXd>& signals) {
  if (signals.size() != t.views.size()) throw Error("signal view count does not match transform");
  for (std::size_t i = 0; i < signals.size(); ++i)
    if (signals[i].size() != t.view_sizes[i]) throw Error("signal length does not match transform");
}

}  // namespace

std::vector<Eigen::VectorXd> spatial_forward(const SuperRayTransform& t,
                                             const std::vector<Eigen::VectorXd>& signals) {
  if (t.mode == TransformMode::NonSeparable) throw Error("non-separable transform has no spatial stage");
  check_signals(t, signals);
  std::vector<Eigen::VectorXd> out;
  out.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i) out.push_back(gft_forward(t.spatial[i], signals[i]));
  return out;
}

BandCoefficients forward(const SuperRayTransform& t, const std::vector<Eigen::VectorXd>& signals) {
  check_signals(t, signals);
  BandCoefficients out;
  if (t.mode == TransformMode::NonSeparable) {
    Eigen::VectorXd f(static_cast<Eigen::Index>(t.vertex_count()));
    Eigen::Index at = 0;
    for (const auto& s : signals) {
      f.segment(at, s.size()) = s;
      at += s.size();
    }
    const Eigen::VectorXd c = gft_forward(t.joint, f);
    out.resize(static_cast<std::size_t>(c.size()));
    for (Eigen::Index b = 0; b < c.size(); ++b) out[static_cast<std::size_t>(b)] = {c(b)};
    return out;
  }
  const auto spatial = spatial_forward(t, signals);
  out.resize(t.band_views.size());
  for (std::size_t b = 0; b < t.band_views.size(); ++b) {
    const auto& present = t.band_views[b];
    Eigen::VectorXd g(static_cast<Eigen::Index>(present.size()));
    for (std::size_t j = 0; j < present.size(); ++j)
      g(static_cast<Eigen::Index>(j)) = spatial[static_cast<std::size_t>(present[j])](static_cast<Eigen::Index>(b));
    const Eigen::VectorXd c = gft_forward(t.angular[static_cast<std::size_t>(t.band_basis[b])], g);
    out[b].assign(c.data(), c.data() + c.size());
  }
  return out;
}

std::vector<Eigen::VectorXd> inverse(const SuperRayTransform& t, const BandCoefficients& coeffs) {
  if (static_cast<int>(coeffs.size()) != t.band_count())
    throw Error("coefficient band count does not match transform");
  std::vector<Eigen::VectorXd> out;
  if (t.mode == TransformMode::NonSeparable) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(coeffs.size()));
    for (std::size_t b = 0; b < coeffs.size(); ++b) {
      if (coeffs[b].size() != 1) throw Error("inconsistent band membership in coefficients");
      c(static_cast<Eigen::Index>(b)) = coeffs[b][0];
    }
    const Eigen::VectorXd f = gft_inverse(t.joint, c);
    Eigen::Index at = 0;
    for (int n : t.view_sizes) {
      out.push_back(f.segment(at, n));
      at += n;
    }
    return out;
  }
  std::vector<Eigen::VectorXd> spatial;
  for (int n : t.view_sizes) spatial.push_back(Eigen::VectorXd::Zero(n));
  for (std::size_t b = 0; b < coeffs.size(); ++b) {
    const auto& present = t.band_views[b];
    if (coeffs[b].size() != present.size()) throw Error("inconsistent band membership in coefficients");
    const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coeffs[b].data(), static_cast<Eigen::Index>(coeffs[b].size()));
    const Eigen::VectorXd g = gft_inverse(t.angular[static_cast<std::size_t>(t.band_basis[b])], c);
    for (std::size_t j = 0; j < present.size(); ++j)
      spatial[static_cast<std::size_t>(present[j])](static_cast<Eigen::Index>(b)) = g(static_cast<Eigen::Index>(j));
  }
  for (std::size_t i = 0; i < spatial.size(); ++i) out.push_back(gft_inverse(t.spatial[i], spatial[i]));
  return out;
}

void for_each_transform(const SuperRaySegmentation& seg, const std::vector<SuperRayMembers>& members,
                        const TransformOptions& options,
                        const std::function<void(int, const SuperRayTransform&)>& visit) {
  if (members.size() != static_cast<std::size_t>(seg.count))
    throw Error("member list does not match the segmentation");
  parallel_for(members.size(), options.threads, [&](std::size_t k) {
    const SuperRayTransform t =
        build_super_ray_transform(seg, static_cast<int>(k), members[k], options.mode, options.coupling);
    visit(static_cast<int>(k), t);
  });
}

namespace {

struct RayStats {
  std::size_t vertices = 0;
  std::size_t coupled = 0;
  std::size_t reused = 0;
  std::size_t blocks = 0;
  std::size_t fallbacks = 0;
  std::size_t increased = 0;
  double orthogonality = 0.0;
  std::uint64_t hash = 0;
};

std::uint64_t hash_bases(const SuperRayTransform& t) {
  Fnv1a h;
  auto add = [&](const Eigen::MatrixXd& m) {
    h.i64(m.rows());
    h.i64(m.cols());
    h.doubles(m.reshaped());
  };
  add(t.joint);
  for (const auto& m : t.spatial) add(m);
  for (const auto& m : t.angular) add(m);
  for (int b : t.band_basis) h.i64(b);
  return h.value();
}

RayStats summarize(const SuperRayTransform& t) {
  RayStats s;
  s.vertices = t.mode == TransformMode::NonSeparable
                   ? t.vertex_count()
                   : static_cast<std::size_t>(*std::max_element(t.view_sizes.begin(), t.view_sizes.end()));
  for (const auto& cb : t.coupling) {
    if (cb.source == CoupledBasis::Source::Reused) ++s.reused;
    if (cb.source != CoupledBasis::Source::Optimized) continue;
    ++s.coupled;
    for (const auto& block : cb.blocks) {
      ++s.blocks;
      if (block.fell_back) ++s.fallbacks;
      if (block.final_objective() > block.initial_objective()) ++s.increased;
      const Eigen::Index n = block.mixing.rows();
      const double err = (block.mixing.transpose() * block.mixing - Eigen::MatrixXd::Identity(n, n))
                             .cwiseAbs()
                             .maxCoeff();
      s.orthogonality = std::max(s.orthogonality, err);
    }
  }
  s.hash = hash_bases(t);
  return s;
}

void reduce(const std::vector<RayStats>& per_ray, TransformStats& stats) {
  stats = {};
  Fnv1a h;
  for (const auto& s : per_ray) {
    stats.max_vertices = std::max(stats.max_vertices, s.vertices);
    stats.coupled_views += s.coupled;
    stats.reused_views += s.reused;
    stats.optimized_blocks += s.blocks;
    stats.fallback_blocks += s.fallbacks;
    stats.increased_blocks += s.increased;
    stats.worst_orthogonality = std::max(stats.worst_orthogonality, s.orthogonality);
    h.u64(s.hash);
  }
  stats.basis_hash = h.value();
}

}  // namespace

CoefficientTensor forward_transform(const LightField& lf, const SuperRaySegmentation& seg,
                                    const std::vector<SuperRayMembers>& members,
                                    const TransformOptions& options, TransformStats* stats) {
  if (lf.n_u() != seg.n_u || lf.n_v() != seg.n_v || lf.height() != seg.height() ||
      lf.width() != seg.width())
    throw Error("light field and segmentation shapes differ");
  CoefficientTensor tensor;
  tensor.rays.resize(members.size());
  std::vector<RayStats> per_ray(members.size());
  for_each_transform(seg, members, options, [&](int k, const SuperRayTransform& t) {
    tensor.rays[static_cast<std::size_t>(k)] = forward(t, gather_signals(lf, members[static_cast<std::size_t>(k)]));
    per_ray[static_cast<std::size_t>(k)] = summarize(t);
  });
  if (stats) reduce(per_ray, *stats);
  return tensor;
}

LightField inverse_transform(const CoefficientTensor& tensor, const SuperRaySegmentation& seg,
                             const std::vector<SuperRayMembers>& members,
                             const TransformOptions& options, TransformStats* stats) {
  if (tensor.rays.size() != members.size()) throw Error("coefficient tensor does not match the segmentation");
  LightField out(seg.n_u, seg.n_v, seg.height(), seg.width(), 0.0);
  std::vector<RayStats> per_ray(members.size());
  for_each_transform(seg, members, options, [&](int k, const SuperRayTransform& t) {
    if (stats) per_ray[static_cast<std::size_t>(k)] = summarize(t);
    const auto& m = members[static_cast<std::size_t>(k)];
    const auto signals = inverse(t, tensor.rays[static_cast<std::size_t>(k)]);
    for (std::size_t i = 0; i < m.views.size(); ++i) {
      Image& img = out.view(m.views[i].view);
      for (std::size_t p = 0; p < m.views[i].pixels.size(); ++p)
        img(m.views[i].pixels[p].row, m.views[i].pixels[p].col) = signals[i](static_cast<Eigen::Index>(p));
    }
  });
  if (stats) reduce(per_ray, *stats);
  return out;
}

}  // namespace lfgt
