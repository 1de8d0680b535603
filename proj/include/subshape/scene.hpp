#pragma once

#include "subshape/analysis.hpp"
#include "subshape/ao_shading.hpp"
#include "subshape/dataset.hpp"
#include "subshape/mesh.hpp"
#include "subshape/subspace.hpp"
#include "subshape/voxelizer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace subshape {

enum class DisplayMode { Scatter, Shape, Combo };

std::string to_string(DisplayMode mode);
DisplayMode parse_display_mode(const std::string& text);

struct SceneParams {
  DisplayMode mode = DisplayMode::Scatter;
  double opacity = 1.0;  // presets 1.0, 0.7, 0.5
  int layers = 2;
  double tau_out_fraction = 0.1;  // outer iso as a fraction of each cluster's field max
  int resolution = 64;
  int filter_half_width = 1;
  int iterations = 3;
  AOParams ao;
  bool show_outliers = false;

  void validate() const;
};

inline constexpr double kComboMaxOpacity = 0.5;

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

/// One fully built display: everything needed to serve or export it.
struct Scene {
  Basis3d basis;
  std::vector<int> labels;
  std::vector<std::string> cluster_names;
  std::vector<Eigen::Vector3d> cluster_colors;
  std::vector<IsoLayerMesh> meshes;  // cluster-major, layer-minor
  std::vector<Eigen::Index> outliers;
  std::vector<double> tau_out;       // absolute outer iso per cluster
  GridSpecd grid;
  std::vector<StageTiming> timings;
  double build_seconds = 0.0;
};

/// Session-scoped state. `current` is stale whenever the basis, labels or
/// parameters changed after it was built. At most one prior scene is kept.
struct SceneState {
  Dataset data;  // normalized
  Basis3d basis;
  SceneParams params;
  std::vector<Eigen::Vector3d> cluster_colors;
  std::optional<Scene> current;
  std::optional<Scene> previous;
  bool stale = true;
};

/// Normalizes the data and starts in scatter mode on the first three axes.
SceneState make_scene_state(Dataset raw, SceneParams params = {});

std::vector<Eigen::Vector3d> default_cluster_colors(int n_clusters);

/// Runs the full pipeline without touching any session state. Stage failures
/// surface as StageError naming the stage.
Scene compute_scene(const Dataset& data, const Basis3d& basis, const SceneParams& params,
                    const std::vector<Eigen::Vector3d>& cluster_colors);

/// Rebuilds and publishes. The prior scene moves into the cache. On failure
/// the state is left exactly as it was.
void build_scene(SceneState& state);

/// Swaps the current and cached scenes, restoring their basis and labels.
/// Returns false (and changes nothing) when the cache is empty.
bool restore_previous(SceneState& state);

void set_mode(SceneState& state, DisplayMode mode);
void set_basis(SceneState& state, Basis3d basis);
void set_params(SceneState& state, const SceneParams& params);

/// Reassigns labels from a stroke on the current scene, compacts the label
/// set and rebuilds. The new cluster takes the stroke color.
void apply_brush(SceneState& state, const BrushStroke& stroke);

PointCloud3d current_cloud(const SceneState& state);

/// Depth along the viewing axis (larger is farther); the viewer looks down -w.
Eigen::VectorXd view_depths(const PointCloud3d& cloud);

/// Layer opacity as served for the active mode (combo caps the base opacity).
double served_opacity(const SceneParams& params, const IsoLayerMesh& mesh);

}  // namespace subshape
