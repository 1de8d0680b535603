#include "subshape/scene.hpp"
#include "subshape/synthetic.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace subshape;

namespace {

SceneState iris_state(SceneParams params = {}) {
  return make_scene_state(load_table_file(fixture::iris_path(), std::string("class")), params);
}

void check_same_meshes(const Scene& a, const Scene& b) {
  REQUIRE(a.meshes.size() == b.meshes.size());
  for (std::size_t i = 0; i < a.meshes.size(); ++i) {
    CHECK(a.meshes[i].vertices == b.meshes[i].vertices);
    CHECK(a.meshes[i].triangles == b.meshes[i].triangles);
    CHECK(a.meshes[i].normals == b.meshes[i].normals);
    CHECK(a.meshes[i].occlusion == b.meshes[i].occlusion);
    CHECK(a.meshes[i].colors == b.meshes[i].colors);
  }
  CHECK(a.outliers == b.outliers);
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("new session state") {
  const auto s = iris_state();
  CHECK(s.data.n_points() == 150);
  CHECK(s.data.n_clusters() == 3);
  CHECK(s.params.mode == DisplayMode::Scatter);
  CHECK(s.stale);
  CHECK(!s.current);
  CHECK(s.basis.rows.isApprox(axis_basis(0, 1, 2, 4).rows));
  CHECK(s.data.values.minCoeff() == 0.0);
  CHECK(s.data.values.maxCoeff() == 1.0);
}

TEST_CASE("iris build: clusters x layers closed meshes") {
  for (const int layers : {1, 2, 3}) {
    SceneParams p;
    p.layers = layers;
    auto s = iris_state(p);
    build_scene(s);
    REQUIRE(s.current);
    CHECK(!s.stale);
    CHECK(s.current->meshes.size() == std::size_t(3 * layers));
    for (std::size_t i = 0; i < s.current->meshes.size(); ++i) {
      const auto& m = s.current->meshes[i];
      CHECK(m.cluster == int(i) / layers);
      CHECK(m.layer == int(i) % layers);
      const auto audit = audit_mesh(m);
      CHECK(audit.consistently_wound());
      CHECK(audit.degenerate_triangles == 0);
      CHECK(m.occlusion.size() == m.vertices.size());
      CHECK(m.colors.size() == m.vertices.size());
      CHECK(m.base_color == s.cluster_colors[std::size_t(m.cluster)]);
      for (const double o : m.occlusion) CHECK((o >= 0.0 && o <= 1.0));
    }
    std::vector<std::string> stages;
    for (const auto& t : s.current->timings) stages.push_back(t.stage);
    CHECK(stages == std::vector<std::string>{"params", "project", "grid_spec", "splat", "box_filter", "extract_layers",
                                             "field_normals", "bake_occlusion", "shade_vertices", "detect_outliers"});
    CHECK(s.current->build_seconds > 0.0);
  }
}

TEST_CASE("restore_previous") {
  auto s = iris_state();
  CHECK(!restore_previous(s));
  CHECK(!s.current);

  build_scene(s);
  CHECK(!restore_previous(s));  // one scene, nothing cached yet
  const Basis3d first = s.basis;

  set_basis(s, transition_to_dimension(s.basis, Slot::W, 3, 0.4));
  CHECK(s.stale);
  build_scene(s);
  const Basis3d second = s.basis;

  REQUIRE(restore_previous(s));
  CHECK(s.basis.rows == first.rows);
  CHECK(s.current->basis.rows == first.rows);
  CHECK(s.previous->basis.rows == second.rows);
  REQUIRE(restore_previous(s));
  CHECK(s.basis.rows == second.rows);
  CHECK(s.previous->basis.rows == first.rows);
}

TEST_CASE("rebuild, restore, rebuild is bit-identical") {
  auto s = iris_state();
  build_scene(s);
  const Scene first = *s.current;
  set_basis(s, rotate_basis(s.basis, Eigen::Matrix3d(Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitY()))));
  build_scene(s);
  REQUIRE(restore_previous(s));
  check_same_meshes(*s.current, first);
  build_scene(s);
  check_same_meshes(*s.current, first);
}

TEST_CASE("failed rebuild keeps the served scene") {
  auto s = iris_state();
  build_scene(s);
  const Scene served = *s.current;
  s.params.resolution = 2;  // bypasses set_params validation
  try {
    build_scene(s);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "params");
  }
  REQUIRE(s.current);
  CHECK(!s.previous);
  check_same_meshes(*s.current, served);
}

TEST_CASE("params: mode changes keep the scene fresh, geometry changes do not") {
  auto s = iris_state();
  build_scene(s);
  SceneParams p = s.params;
  p.mode = DisplayMode::Combo;
  p.show_outliers = true;
  set_params(s, p);
  CHECK(!s.stale);
  p.layers = 3;
  set_params(s, p);
  CHECK(s.stale);
  p.layers = 0;
  CHECK_THROWS_AS(set_params(s, p), Error);
  CHECK(s.params.layers == 3);
}

TEST_CASE("served opacity") {
  SceneParams p;
  p.layers = 2;
  p.opacity = 0.7;
  IsoLayerMesh outer, inner;
  inner.layer = 1;
  outer.opacity = 0.35;
  inner.opacity = 0.7;
  CHECK(served_opacity(p, outer) == 0.35);
  CHECK(served_opacity(p, inner) == 0.7);
  p.mode = DisplayMode::Combo;
  CHECK(served_opacity(p, outer) == doctest::Approx(0.25));
  CHECK(served_opacity(p, inner) == doctest::Approx(0.5));
  p.opacity = 0.4;
  CHECK(served_opacity(p, inner) == doctest::Approx(0.4));
}

TEST_CASE("brush relabels, recolours and compacts") {
  auto s = iris_state();
  build_scene(s);
  const auto& outer1 = s.current->meshes[2];  // cluster 1, layer 0
  REQUIRE(outer1.cluster == 1);
  REQUIRE(outer1.layer == 0);

  BrushStroke half{1, {}, 3, Eigen::Vector3d(1.0, 0.9, 0.1)};
  const double mid = mesh_bounds(outer1).center().x();
  for (std::uint32_t t = 0; t < outer1.triangles.size(); ++t) {
    if (outer1.vertices[outer1.triangles[t][0]].x() > mid) half.painted.push_back(t);
  }
  const auto before = s.data.labels;
  apply_brush(s, half);
  CHECK(s.data.n_clusters() == 4);
  CHECK(s.cluster_colors.size() == 4);
  CHECK(s.cluster_colors[3] == half.color);
  CHECK(s.data.label_names.size() == 4);
  CHECK(!s.stale);
  CHECK(s.current->meshes.size() == 8);
  int moved = 0;
  for (std::size_t p = 0; p < before.size(); ++p) {
    if (before[p] != 1) CHECK(s.data.labels[p] == before[p]);
    moved += s.data.labels[p] == 3;
  }
  CHECK(moved > 0);
  CHECK(moved < 50);

  // Undo brings the labels back along with the scene.
  REQUIRE(restore_previous(s));
  CHECK(s.data.labels == before);
  CHECK(s.cluster_colors.size() == 3);
  REQUIRE(restore_previous(s));

  // Painting every triangle of cluster 0 into a fresh id empties cluster 0.
  const auto& outer0 = s.current->meshes[0];
  BrushStroke all{0, {}, 6, Eigen::Vector3d(0.2, 0.2, 0.2)};
  for (std::uint32_t t = 0; t < outer0.triangles.size(); ++t) all.painted.push_back(t);
  const auto colors = s.cluster_colors;
  const auto labels = s.data.labels;
  apply_brush(s, all);
  CHECK(s.data.n_clusters() == 4);
  CHECK(s.cluster_colors == std::vector<Eigen::Vector3d>{colors[1], colors[2], colors[3], all.color});
  for (std::size_t p = 0; p < labels.size(); ++p) CHECK(s.data.labels[p] == (labels[p] == 0 ? 3 : labels[p] - 1));
}

TEST_CASE("brush failures leave the session untouched") {
  auto s = iris_state();
  build_scene(s);
  const auto labels = s.data.labels;
  CHECK_THROWS_AS(apply_brush(s, BrushStroke{0, {0}, 0, {}}), Error);
  CHECK_THROWS_AS(apply_brush(s, BrushStroke{7, {0}, 3, {}}), Error);
  set_basis(s, s.basis);
  CHECK_THROWS_AS(apply_brush(s, BrushStroke{0, {0}, 3, {}}), Error);
  CHECK(s.data.labels == labels);
  apply_brush(s, BrushStroke{0, {}, 3, {}});
  CHECK(s.data.labels == labels);
}

TEST_CASE("view depth and synthetic scale build") {
  auto s = make_scene_state(make_blobs(BlobOptions{}));
  CHECK(s.data.n_points() == 900);
  CHECK(s.data.n_dims() == 10);
  build_scene(s);
  CHECK(s.current->meshes.size() == 6);
  const auto cloud = current_cloud(s);
  const auto d = view_depths(cloud);
  for (Eigen::Index i = 0; i < cloud.size(); ++i) CHECK(d[i] == -cloud.positions(i, 2));
}

}
