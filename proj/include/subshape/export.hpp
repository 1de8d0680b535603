#pragma once

#include "subshape/scene.hpp"

#include <string>
#include <vector>

namespace subshape {

enum class ExportFormat { Obj, Gltf };

ExportFormat parse_export_format(const std::string& text);

struct ExportFile {
  std::string name;
  std::string bytes;
};

/// Serializes the current scene. OBJ yields `<stem>.obj` plus a `<stem>.mtl`
/// sidecar (one object and material per cluster layer); glTF yields a single
/// `<stem>.gltf` with an embedded buffer. Outliers are included as a point
/// set when the scene parameters ask for them. Output is byte-deterministic.
std::vector<ExportFile> export_scene(const SceneState& state, ExportFormat format, const std::string& stem);

std::string object_name(const IsoLayerMesh& mesh);

}  // namespace subshape
