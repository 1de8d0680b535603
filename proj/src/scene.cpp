#include "subshape/scene.hpp"

#include "subshape/error.hpp"
#include "subshape/isosurface.hpp"

#include <chrono>
#include <utility>

namespace subshape {

std::string to_string(DisplayMode mode) {
  switch (mode) {
    case DisplayMode::Scatter: return "scatter";
    case DisplayMode::Shape: return "shape";
    case DisplayMode::Combo: return "combo";
  }
  return "scatter";
}

DisplayMode parse_display_mode(const std::string& text) {
  if (text == "scatter") return DisplayMode::Scatter;
  if (text == "shape") return DisplayMode::Shape;
  if (text == "combo") return DisplayMode::Combo;
  throw Error("unknown display mode '" + text + "'");
}

void SceneParams::validate() const {
  if (!(opacity > 0.0 && opacity <= 1.0)) throw Error("opacity must lie in (0,1]");
  if (layers < 1) throw Error("layer count must be at least 1");
  if (!(tau_out_fraction > 0.0 && tau_out_fraction < 1.0)) throw Error("tau-out fraction must lie in (0,1)");
  if (layers > 1 && !(tau_out_fraction < 0.5)) throw Error("tau-out fraction must be below 0.5 for multiple layers");
  if (resolution < 8) throw Error("grid resolution must be at least 8");
  if (filter_half_width < 1) throw Error("filter half-width must be at least 1");
  if (iterations < 0) throw Error("iteration count must be non-negative");
  if (ao.n_directions < 8) throw Error("occlusion needs at least 8 directions");
  if (ao.max_distance && !(*ao.max_distance > 0.0)) throw Error("occlusion probe distance must be positive");
  if (ao.step && !(*ao.step > 0.0)) throw Error("occlusion step must be positive");
  if (!(ao.ambient_floor >= 0.0 && ao.ambient_floor < 1.0)) throw Error("ambient floor must lie in [0,1)");
}

std::vector<Eigen::Vector3d> default_cluster_colors(int n_clusters) {
  std::vector<Eigen::Vector3d> colors;
  for (int c = 0; c < n_clusters; ++c) colors.push_back(cluster_color(c));
  return colors;
}

SceneState make_scene_state(Dataset raw, SceneParams params) {
  params.validate();
  if (raw.n_dims() < 3) throw Error("projection needs at least 3 dimensions");
  SceneState state;
  state.data = normalize_columns(std::move(raw));
  state.data.labels = compact_labels(state.data.labels);
  state.basis = axis_basis<double>(0, 1, 2, state.data.n_dims());
  state.params = params;
  state.cluster_colors = default_cluster_colors(state.data.n_clusters());
  return state;
}

namespace {

class StageClock {
public:
  explicit StageClock(std::vector<StageTiming>& out) : out_(out) {}

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(stage, t0);
      } else {
        auto result = fn();
        record(stage, t0);
        return result;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(stage, e.what());
    }
  }

private:
  void record(const std::string& stage, std::chrono::steady_clock::time_point t0) {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& t : out_) {
      if (t.stage == stage) {
        t.seconds += s;
        return;
      }
    }
    out_.push_back({stage, s});
  }

  std::vector<StageTiming>& out_;
};

}  // namespace

Scene compute_scene(const Dataset& data, const Basis3d& basis, const SceneParams& params,
                    const std::vector<Eigen::Vector3d>& cluster_colors) {
  const auto start = std::chrono::steady_clock::now();
  Scene scene;
  StageClock clock(scene.timings);
  clock.run("params", [&] { params.validate(); });

  const auto cloud = clock.run("project", [&] {
    if (data.n_dims() < 3) throw Error("projection needs at least 3 dimensions");
    return project(data, basis);
  });
  scene.grid = clock.run("grid_spec", [&] {
    return grid_spec_for(cloud, params.resolution, params.filter_half_width, params.iterations);
  });
  auto grid = clock.run("splat", [&] { return splat(cloud, scene.grid); });
  grid = clock.run("box_filter", [&] { return box_filter(std::move(grid), params.filter_half_width, params.iterations); });

  const int n_clusters = grid.n_clusters();
  if (static_cast<int>(cluster_colors.size()) < n_clusters) throw StageError("params", "missing cluster colors");
  scene.tau_out.resize(static_cast<std::size_t>(n_clusters));
  clock.run("extract_layers", [&] {
    for (int c = 0; c < n_clusters; ++c) {
      const double tau = params.tau_out_fraction * grid.field(c).maxCoeff();
      scene.tau_out[static_cast<std::size_t>(c)] = tau;
      if (!(tau > 0.0)) continue;  // empty cluster
      for (auto& mesh : extract_layers(grid, c, params.layers, params.opacity, tau)) {
        mesh.base_color = cluster_colors[static_cast<std::size_t>(c)];
        scene.meshes.push_back(std::move(mesh));
      }
    }
  });
  // extract_surface fills field normals; the stage is timed for reporting.
  clock.run("field_normals", [&] {
    for (auto& mesh : scene.meshes) {
      if (mesh.normals.size() != mesh.vertices.size()) mesh.normals = field_normals(mesh, grid, mesh.cluster);
    }
  });
  clock.run("bake_occlusion", [&] {
    const Field<double> occluders = union_field(grid);
    for (auto& mesh : scene.meshes) mesh.occlusion = bake_occlusion_field(mesh, grid.spec, occluders, params.ao);
  });
  clock.run("shade_vertices", [&] {
    for (auto& mesh : scene.meshes) mesh.colors = shade_vertices(mesh, params.ao);
  });
  scene.outliers = clock.run("detect_outliers", [&] { return detect_outliers(cloud, grid, scene.tau_out); });

  scene.basis = basis;
  scene.labels = data.labels;
  scene.cluster_names = data.label_names;
  scene.cluster_colors = cluster_colors;
  scene.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return scene;
}

void build_scene(SceneState& state) {
  Scene fresh = compute_scene(state.data, state.basis, state.params, state.cluster_colors);
  if (state.current) state.previous = std::move(state.current);
  state.current = std::move(fresh);
  state.stale = false;
}

bool restore_previous(SceneState& state) {
  if (!state.previous) return false;
  std::swap(state.current, state.previous);
  state.basis = state.current->basis;
  state.data.labels = state.current->labels;
  state.data.label_names = state.current->cluster_names;
  state.cluster_colors = state.current->cluster_colors;
  state.stale = false;
  return true;
}

void set_mode(SceneState& state, DisplayMode mode) { state.params.mode = mode; }

void set_basis(SceneState& state, Basis3d basis) {
  if (basis.dims() != state.data.n_dims()) throw Error("basis dimension does not match the dataset");
  state.basis = std::move(basis);
  state.stale = true;
}

void set_params(SceneState& state, const SceneParams& params) {
  params.validate();
  const SceneParams& old = state.params;
  const bool geometry_changed = old.opacity != params.opacity || old.layers != params.layers ||
                                old.tau_out_fraction != params.tau_out_fraction ||
                                old.resolution != params.resolution ||
                                old.filter_half_width != params.filter_half_width ||
                                old.iterations != params.iterations || old.ao.n_directions != params.ao.n_directions ||
                                old.ao.max_distance != params.ao.max_distance || old.ao.step != params.ao.step ||
                                old.ao.ambient_floor != params.ao.ambient_floor;
  state.params = params;
  if (geometry_changed) state.stale = true;
}

PointCloud3d current_cloud(const SceneState& state) { return project(state.data, state.basis); }

Eigen::VectorXd view_depths(const PointCloud3d& cloud) { return -cloud.positions.col(2); }

double served_opacity(const SceneParams& params, const IsoLayerMesh& mesh) {
  if (params.mode != DisplayMode::Combo) return mesh.opacity;
  const double alpha = std::min(params.opacity, kComboMaxOpacity);
  return layer_opacity(alpha, mesh.layer, params.layers);
}

void apply_brush(SceneState& state, const BrushStroke& stroke) {
  if (stroke.painted.empty()) return;
  if (!state.current || state.stale) throw Error("brushing needs a freshly built scene");
  const IsoLayerMesh* outer = nullptr;
  for (const auto& m : state.current->meshes) {
    if (m.cluster == stroke.cluster && m.layer == 0) outer = &m;
  }
  if (!outer) throw Error("no shape for cluster " + std::to_string(stroke.cluster));

  const auto updated = brush_assign(stroke, *outer, current_cloud(state));

  std::vector<Eigen::Vector3d> colors = state.cluster_colors;
  std::vector<std::string> names = state.data.label_names;
  names.resize(colors.size());
  if (static_cast<std::size_t>(stroke.new_cluster) >= colors.size()) {
    for (int c = static_cast<int>(colors.size()); c <= stroke.new_cluster; ++c) {
      colors.push_back(cluster_color(c));
      names.push_back("cluster" + std::to_string(c));
    }
  }
  colors[static_cast<std::size_t>(stroke.new_cluster)] = stroke.color;

  // Compact ids in ascending order so surviving clusters keep their relative order.
  std::vector<int> used(colors.size(), 0);
  for (const int l : updated) used[static_cast<std::size_t>(l)] = 1;
  std::vector<int> remap(colors.size(), -1);
  std::vector<Eigen::Vector3d> compact_colors;
  std::vector<std::string> compact_names;
  for (std::size_t c = 0; c < colors.size(); ++c) {
    if (used[c]) {
      remap[c] = static_cast<int>(compact_colors.size());
      compact_colors.push_back(colors[c]);
      compact_names.push_back(names[c].empty() ? "cluster" + std::to_string(c) : names[c]);
    }
  }
  std::vector<int> labels;
  labels.reserve(updated.size());
  for (const int l : updated) labels.push_back(remap[static_cast<std::size_t>(l)]);

  SceneState next = state;
  next.data.labels = std::move(labels);
  next.data.label_names = std::move(compact_names);
  next.cluster_colors = std::move(compact_colors);
  build_scene(next);
  state = std::move(next);
}

}  // namespace subshape
