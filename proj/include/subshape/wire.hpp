#pragma once

// Payloads served to the explorer. Each payload is a JSON document; bulk
// attributes are little-endian binary arrays carried as base64 strings with
// their element type and count:
//   {"dtype": "f32" | "u32", "components": 3, "count": N, "data": "<base64>"}

#include "subshape/scene.hpp"

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace subshape {

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

nlohmann::json encode_f32(std::span<const Eigen::Vector3d> values);
nlohmann::json encode_f32(std::span<const double> values);
nlohmann::json encode_u32(std::span<const std::uint32_t> values);

std::vector<float> decode_f32(const nlohmann::json& array);
std::vector<std::uint32_t> decode_u32(const nlohmann::json& array);

/// Projected points, labels, colors, depth-cue opacities and per-dimension
/// influence for the current basis.
nlohmann::json projection_payload(const SceneState& state);

/// Per (cluster, layer) mesh: positions, indices, normals, shaded colors,
/// opacity, ids; plus the outlier list.
nlohmann::json mesh_payload(const SceneState& state);

/// What the active display mode shows: points (scatter), meshes with
/// optional outliers (shape), or capped-opacity meshes with all points (combo).
nlohmann::json mode_payload(const SceneState& state);

nlohmann::json params_to_json(const SceneParams& params);

/// Applies a partial parameter update; unknown keys are rejected.
SceneParams apply_params_delta(SceneParams params, const nlohmann::json& delta);

}  // namespace subshape
