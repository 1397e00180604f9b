#include <doctest.h>

#include <cmath>
#include <random>

#include "lfgt/synthetic.hpp"
#include "lfgt/transform.hpp"
#include "support.hpp"

using namespace lfgt;

namespace {

struct Fixture {
  LightField lf;
  SuperRaySegmentation seg;
  std::vector<SuperRayMembers> members;
};

Fixture scene_fixture(std::uint64_t seed, int n, int size, int k, RandomSceneOptions opts = {}) {
  const RenderedScene r = render_synthetic(random_layered_scene(seed, n, n, size, size, opts), n, n, size, size);
  Fixture f;
  f.lf = r.light_field;
  const SuperPixelMap sp = slic_segment(r.light_field.view(0, 0), {k, 10.0, 10});
  f.seg = project_labels(sp, r.disparity, n, n);
  f.members = collect_members(f.seg);
  return f;
}

Fixture single_ray(const LightField& lf) {
  Fixture f;
  f.lf = lf;
  f.seg = project_labels({LabelMap(lf.height(), lf.width(), 0), 1}, std::vector<double>{0.0}, lf.n_u(), lf.n_v());
  f.members = collect_members(f.seg);
  return f;
}

double max_abs_diff(const LightField& a, const LightField& b) {
  double m = 0;
  for (const auto& w : canonical_views(a.n_u(), a.n_v()))
    for (std::size_t i = 0; i < a.view(w).size(); ++i) m = std::max(m, std::abs(a.view(w)[i] - b.view(w)[i]));
  return m;
}

double energy(const LightField& lf) {
  double e = 0;
  for (const auto& w : canonical_views(lf.n_u(), lf.n_v()))
    for (double s : lf.view(w).data()) e += s * s;
  return e;
}

const TransformMode kModes[] = {TransformMode::NonSeparable, TransformMode::Separable,
                                TransformMode::SeparableOptimized};

}  // namespace

TEST_CASE("mode names") {
  for (TransformMode m : kModes) CHECK(parse_transform_mode(to_string(m)) == m);
  CHECK(to_string(TransformMode::SeparableOptimized) == "separable-opt");
  CHECK_THROWS(parse_transform_mode("fourier"));
}

TEST_CASE("round trip and Parseval in every mode") {
  const Fixture f = scene_fixture(5, 3, 24, 16);
  for (TransformMode mode : kModes) {
    CAPTURE(to_string(mode));
    TransformOptions opt;
    opt.mode = mode;
    TransformStats stats;
    const CoefficientTensor c = forward_transform(f.lf, f.seg, f.members, opt, &stats);
    CHECK(std::abs(c.energy() - energy(f.lf)) <= 1e-9 * energy(f.lf));
    CHECK(c.coefficient_count() == f.lf.sample_count());
    const LightField back = inverse_transform(c, f.seg, f.members, opt);
    CHECK(max_abs_diff(back, f.lf) < 1e-8);
    CHECK(stats.max_vertices > 0);
  }
}

TEST_CASE("random 2x2 light field with one full-frame super-ray") {
  std::mt19937_64 rng(3);
  const Fixture f = single_ray(test::random_light_field(rng, 2, 2, 9, 7));
  for (TransformMode mode : kModes) {
    TransformOptions opt;
    opt.mode = mode;
    const CoefficientTensor c = forward_transform(f.lf, f.seg, f.members, opt);
    CHECK(max_abs_diff(inverse_transform(c, f.seg, f.members, opt), f.lf) < 1e-8);
  }
}

TEST_CASE("identical views put all separable energy in angular band 0") {
  SyntheticScene scene;
  scene.background.amplitude = 50.0;
  scene.background.noise = 20.0;
  const RenderedScene r = render_synthetic(scene, 3, 3, 24, 24);
  const SuperPixelMap sp = slic_segment(r.light_field.view(0, 0), {6, 10.0, 10});
  const SuperRaySegmentation seg = project_labels(sp, r.disparity, 3, 3);
  const auto members = collect_members(seg);
  for (TransformMode mode : {TransformMode::Separable, TransformMode::SeparableOptimized}) {
    TransformOptions opt;
    opt.mode = mode;
    TransformStats stats;
    const CoefficientTensor c = forward_transform(r.light_field, seg, members, opt, &stats);
    for (const auto& ray : c.rays)
      for (const auto& band : ray) {
        CHECK(band.size() == 9);
        for (std::size_t a = 1; a < band.size(); ++a) CHECK(std::abs(band[a]) < 1e-9);
      }
    if (mode == TransformMode::SeparableOptimized) CHECK(stats.reused_views == static_cast<std::size_t>(8 * seg.count));
    CHECK(stats.optimized_blocks == 0);
  }
}

TEST_CASE("coherent super-ray with identical content has equal spatial coefficients in every view") {
  SyntheticScene scene;
  scene.background_disparity = 1.0;
  scene.background.amplitude = 50.0;
  const RenderedScene r = render_synthetic(scene, 2, 2, 30, 30);
  const SuperPixelMap sp = slic_segment(r.light_field.view(0, 0), {9, 10.0, 10});
  const SuperRaySegmentation seg = project_labels(sp, r.disparity, 2, 2);
  const auto members = collect_members(seg);
  const CoherenceReport rep = coherence(seg, members);
  int tested = 0;
  for (int k = 0; k < seg.count; ++k) {
    if (!rep.coherent[static_cast<std::size_t>(k)]) continue;
    // skip super-rays touching the appearing border strip
    bool inside = true;
    for (const auto& p : members[static_cast<std::size_t>(k)].views[0].pixels) inside = inside && p.row > 0 && p.col > 0;
    if (!inside) continue;
    const SuperRayTransform t = build_super_ray_transform(seg, k, members[static_cast<std::size_t>(k)],
                                                          TransformMode::Separable, {});
    const auto spatial = spatial_forward(t, gather_signals(r.light_field, members[static_cast<std::size_t>(k)]));
    for (std::size_t i = 1; i < spatial.size(); ++i) CHECK((spatial[i] - spatial[0]).cwiseAbs().maxCoeff() < 1e-9);
    ++tested;
  }
  CHECK(tested > 0);
}

TEST_CASE("single view: the angular stage is the identity") {
  std::mt19937_64 rng(9);
  const Fixture f = single_ray(test::random_light_field(rng, 1, 1, 6, 5));
  const SuperRayTransform t = build_super_ray_transform(f.seg, 0, f.members[0], TransformMode::Separable, {});
  const auto signals = gather_signals(f.lf, f.members[0]);
  const auto spatial = spatial_forward(t, signals);
  const BandCoefficients c = forward(t, signals);
  REQUIRE(c.size() == 30);
  for (std::size_t b = 0; b < c.size(); ++b) {
    REQUIRE(c[b].size() == 1);
    CHECK(c[b][0] == doctest::Approx(spatial[0](static_cast<Eigen::Index>(b))).epsilon(1e-14));
  }
}

TEST_CASE("band b exists in the views holding more than b pixels") {
  const Fixture f = scene_fixture(11, 3, 24, 16);
  TransformOptions opt;
  opt.mode = TransformMode::Separable;
  const CoefficientTensor c = forward_transform(f.lf, f.seg, f.members, opt);
  for (int k = 0; k < f.seg.count; ++k) {
    const auto& m = f.members[static_cast<std::size_t>(k)];
    std::size_t largest = 0;
    for (const auto& vp : m.views) largest = std::max(largest, vp.pixels.size());
    REQUIRE(c.rays[static_cast<std::size_t>(k)].size() == largest);
    for (std::size_t b = 0; b < largest; ++b) {
      std::size_t present = 0;
      for (const auto& vp : m.views) present += vp.pixels.size() > b;
      CHECK(c.rays[static_cast<std::size_t>(k)][b].size() == present);
    }
  }
  // non-separable stores one coefficient per band
  opt.mode = TransformMode::NonSeparable;
  const CoefficientTensor n = forward_transform(f.lf, f.seg, f.members, opt);
  for (int k = 0; k < f.seg.count; ++k) {
    CHECK(n.rays[static_cast<std::size_t>(k)].size() == f.members[static_cast<std::size_t>(k)].total_size());
    for (const auto& band : n.rays[static_cast<std::size_t>(k)]) CHECK(band.size() == 1);
  }
}

TEST_CASE("inverse rejects inconsistent band membership") {
  const Fixture f = scene_fixture(2, 2, 24, 4);
  TransformOptions opt;
  opt.mode = TransformMode::Separable;
  CoefficientTensor c = forward_transform(f.lf, f.seg, f.members, opt);
  c.rays[0][0].pop_back();
  CHECK_THROWS_WITH(inverse_transform(c, f.seg, f.members, opt), doctest::Contains("inconsistent"));
  c = forward_transform(f.lf, f.seg, f.members, opt);
  c.rays.pop_back();
  CHECK_THROWS(inverse_transform(c, f.seg, f.members, opt));
}

TEST_CASE("non-separable mode rejects super-rays above the dense cap") {
  const Fixture f = single_ray(LightField(2, 2, 41, 41, 1.0));  // 6724 vertices
  TransformOptions opt;
  opt.mode = TransformMode::NonSeparable;
  CHECK_THROWS_AS(forward_transform(f.lf, f.seg, f.members, opt), SizeError);
}

TEST_CASE("results are independent of the thread count") {
  RandomSceneOptions o;
  o.max_disparity = 1.5;
  const Fixture f = scene_fixture(21, 3, 36, 12, o);
  TransformOptions one, many;
  one.threads = 1;
  many.threads = 4;
  TransformStats s1, s4;
  const CoefficientTensor a = forward_transform(f.lf, f.seg, f.members, one, &s1);
  const CoefficientTensor b = forward_transform(f.lf, f.seg, f.members, many, &s4);
  CHECK(a.rays == b.rays);
  CHECK(s1.basis_hash == s4.basis_hash);
  CHECK(s1.optimized_blocks == s4.optimized_blocks);
  CHECK(s1.coupled_views > 0);
  CHECK(s1.worst_orthogonality <= 1e-6);
  CHECK(s1.increased_blocks == 0);
}
