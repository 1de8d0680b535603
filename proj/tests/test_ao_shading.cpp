#include "subshape/ao_shading.hpp"
#include "subshape/isosurface.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <numeric>

using namespace subshape;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()); }

struct WellCase {
  oracle::Well well;
  GridSpecd spec = oracle::cube_grid(0.0, 1.0, 65);
  Field<double> field = well.field(spec);
  IsoLayerMesh mesh = extract_field_surface(spec, field, 0.5);

  bool at_bottom(std::size_t i) const {
    const auto& v = mesh.vertices[i];
    return std::abs(v.z() - well.bottom) < 0.5 * spec.voxel() &&
           (v.head<2>() - well.axis).norm() < well.radius - spec.voxel();
  }
};

}  // namespace

TEST_SUITE("ao_shading") {

TEST_CASE("hemisphere directions") {
  const auto dirs = hemisphere_directions(64);
  REQUIRE(dirs.size() == 64);
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& d : dirs) {
    CHECK(std::abs(d.norm() - 1.0) < 1e-12);
    CHECK(d.z() > 0.0);
    sum += d;
  }
  // Cosine weighting: E[z] = 2/3, tangential mean near zero.
  CHECK(sum.z() / 64 == doctest::Approx(2.0 / 3).epsilon(0.02));
  CHECK(std::abs(sum.x() / 64) < 0.05);
  CHECK(std::abs(sum.y() / 64) < 0.05);
  CHECK(hemisphere_directions(64) == dirs);
}

TEST_CASE("defaults resolve from the grid") {
  const auto spec = oracle::cube_grid(0.0, 2.0, 33);
  const auto r = resolve(AOParams{}, spec);
  CHECK(r.n_directions == 64);
  CHECK(r.max_distance == doctest::Approx(0.5));
  CHECK(r.step == doctest::Approx(0.5 * 2.0 / 32));
  CHECK(r.ambient_floor == 0.2);
}

TEST_CASE("open plane is unoccluded") {
  const auto spec = oracle::cube_grid(0.0, 1.0, 33);
  const auto slab = oracle::sample_function(spec, [](const Eigen::Vector3d& p) {
    return std::clamp(0.5 - (p.z() - 0.3) / 0.1, 0.0, 1.0) * (p.z() > 0.0 ? 1.0 : 0.0);
  });
  const auto mesh = extract_field_surface(spec, slab, 0.5);
  const auto occ = bake_occlusion_field(mesh, spec, slab, AOParams{});
  int top = 0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (std::abs(mesh.vertices[i].z() - 0.3) < 1e-3 && mesh.normals[i].z() > 0.99) {
      ++top;
      CHECK(occ[i] == 0.0);
    }
  }
  CHECK(top > 100);
}

TEST_CASE("isolated sphere is barely occluded and matches the oracle") {
  const auto spec = oracle::cube_grid(-1.0, 1.0, 33);
  const auto field = oracle::sphere_field(spec, Eigen::Vector3d(0.03, -0.02, 0.01), 0.5);
  const auto mesh = extract_field_surface(spec, field, 0.5);
  const auto r = resolve(AOParams{}, spec);
  const auto occ = bake_occlusion_field(mesh, spec, field, AOParams{});
  for (const double o : occ) CHECK(o < 0.15);
  for (std::size_t i = 0; i < mesh.vertices.size(); i += 37) {
    const double ref = oracle::brute_force_occlusion(spec, field, 0.5, mesh.vertices[i], mesh.normals[i], r.max_distance,
                                                     r.step, 64, unsigned(i));
    CHECK(std::abs(ref - occ[i]) <= 0.1);
  }
}

TEST_CASE("deep well bottom is dark and matches the oracle") {
  const WellCase w;
  REQUIRE(w.well.depth() >= 4 * w.well.width());
  const auto r = resolve(AOParams{}, w.spec);
  const auto occ = bake_occlusion_field(w.mesh, w.spec, w.field, AOParams{});
  int bottom = 0;
  for (std::size_t i = 0; i < w.mesh.vertices.size(); ++i) {
    if (!w.at_bottom(i)) continue;
    ++bottom;
    CHECK(occ[i] > 0.6);
    const double ref = oracle::brute_force_occlusion(w.spec, w.field, 0.5, w.mesh.vertices[i], w.mesh.normals[i],
                                                     r.max_distance, r.step, 64, unsigned(i));
    CHECK(ref > 0.6);
    CHECK(std::abs(ref - occ[i]) <= 0.1);
  }
  CHECK(bottom >= 4);
}

TEST_CASE("doubling directions barely moves the mean") {
  const auto spec = oracle::cube_grid(-1.0, 1.0, 33);
  const auto field = oracle::sphere_field(spec, Eigen::Vector3d::Zero(), 0.5);
  const auto mesh = extract_field_surface(spec, field, 0.5);
  AOParams p64, p128;
  p128.n_directions = 128;
  CHECK(std::abs(mean(bake_occlusion_field(mesh, spec, field, p64)) - mean(bake_occlusion_field(mesh, spec, field, p128))) < 0.02);

  const WellCase w;
  CHECK(std::abs(mean(bake_occlusion_field(w.mesh, w.spec, w.field, p64)) -
                 mean(bake_occlusion_field(w.mesh, w.spec, w.field, p128))) < 0.02);
}

TEST_CASE("a neighbouring cluster never lowers occlusion") {
  const auto spec = oracle::cube_grid(0.0, 1.0, 41);
  DensityGridd alone{spec, {oracle::sphere_field(spec, Eigen::Vector3d(0.35, 0.5, 0.5), 0.15)}, {1}};
  DensityGridd pair = alone;
  pair.fields.push_back(oracle::sphere_field(spec, Eigen::Vector3d(0.7, 0.5, 0.5), 0.15));
  pair.counts.push_back(1);
  const auto mesh = extract_surface(alone, 0, 0.15);
  const auto solo = bake_occlusion(mesh, alone, 0, AOParams{});
  const auto both = bake_occlusion(mesh, pair, 0, AOParams{});
  double gained = 0;
  for (std::size_t i = 0; i < solo.size(); ++i) {
    CHECK(both[i] >= solo[i]);
    gained += both[i] - solo[i];
  }
  CHECK(gained > 0.0);
}

TEST_CASE("union field is the pointwise maximum") {
  const auto spec = oracle::cube_grid(0.0, 1.0, 9);
  DensityGridd g{spec, {oracle::sphere_field(spec, Eigen::Vector3d(0.3, 0.5, 0.5), 0.2),
                        oracle::sphere_field(spec, Eigen::Vector3d(0.6, 0.5, 0.5), 0.2)}, {1, 1}};
  const auto u = union_field(g);
  CHECK((u - g.fields[0].max(g.fields[1])).abs().maxCoeff() == 0.0);
}

TEST_CASE("shade_vertices") {
  IsoLayerMesh m;
  m.vertices.assign(3, Eigen::Vector3d::Zero());
  m.occlusion = {0.0, 1.0, 0.5};
  m.base_color = Eigen::Vector3d(0.2, 0.4, 0.8);
  const auto c = shade_vertices(m, AOParams{});
  CHECK(c[0] == m.base_color);
  CHECK(c[1].isApprox(0.2 * m.base_color, 1e-15));
  CHECK(c[2].isApprox(0.6 * m.base_color, 1e-15));
}

}
