#include "subshape/wire.hpp"

#include "subshape/error.hpp"

#include <array>
#include <bit>
#include <cstring>

namespace subshape {

namespace {

constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

void put_le32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_le32(const std::string& bytes, std::size_t offset) {
  const auto* b = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

nlohmann::json array_header(const char* dtype, int components, std::size_t count, const std::string& bytes) {
  return {{"dtype", dtype}, {"components", components}, {"count", count}, {"data", base64_encode(bytes)}};
}

nlohmann::json color_json(const Eigen::Vector3d& c) { return nlohmann::json::array({c.x(), c.y(), c.z()}); }

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (std::uint32_t(static_cast<unsigned char>(bytes[i])) << 16) |
                            (std::uint32_t(static_cast<unsigned char>(bytes[i + 1])) << 8) |
                            std::uint32_t(static_cast<unsigned char>(bytes[i + 2]));
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out.push_back(kAlphabet[(n >> 6) & 63]);
    out.push_back(kAlphabet[n & 63]);
  }
  const std::size_t rest = bytes.size() - i;
  if (rest > 0) {
    std::uint32_t n = std::uint32_t(static_cast<unsigned char>(bytes[i])) << 16;
    if (rest == 2) n |= std::uint32_t(static_cast<unsigned char>(bytes[i + 1])) << 8;
    out.push_back(kAlphabet[(n >> 18) & 63]);
    out.push_back(kAlphabet[(n >> 12) & 63]);
    out.push_back(rest == 2 ? kAlphabet[(n >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  std::array<int, 256> lookup{};
  lookup.fill(-1);
  for (std::size_t i = 0; i < kAlphabet.size(); ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = static_cast<int>(i);
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (const char ch : text) {
    if (ch == '=') break;
    const int v = lookup[static_cast<unsigned char>(ch)];
    if (v < 0) throw Error("invalid base64 payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

nlohmann::json encode_f32(std::span<const Eigen::Vector3d> values) {
  std::string bytes;
  bytes.reserve(values.size() * 12);
  for (const auto& v : values) {
    for (int a = 0; a < 3; ++a) put_le32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v[a])));
  }
  return array_header("f32", 3, values.size(), bytes);
}

nlohmann::json encode_f32(std::span<const double> values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (const double v : values) put_le32(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return array_header("f32", 1, values.size(), bytes);
}

nlohmann::json encode_u32(std::span<const std::uint32_t> values) {
  std::string bytes;
  bytes.reserve(values.size() * 4);
  for (const auto v : values) put_le32(bytes, v);
  return array_header("u32", 1, values.size(), bytes);
}

std::vector<float> decode_f32(const nlohmann::json& array) {
  if (array.at("dtype") != "f32") throw Error("expected an f32 array");
  const std::string bytes = base64_decode(array.at("data").get<std::string>());
  const std::size_t n = array.at("count").get<std::size_t>() * array.at("components").get<std::size_t>();
  if (bytes.size() != n * 4) throw Error("array length does not match its header");
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::bit_cast<float>(get_le32(bytes, 4 * i));
  return out;
}

std::vector<std::uint32_t> decode_u32(const nlohmann::json& array) {
  if (array.at("dtype") != "u32") throw Error("expected a u32 array");
  const std::string bytes = base64_decode(array.at("data").get<std::string>());
  const std::size_t n = array.at("count").get<std::size_t>() * array.at("components").get<std::size_t>();
  if (bytes.size() != n * 4) throw Error("array length does not match its header");
  std::vector<std::uint32_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = get_le32(bytes, 4 * i);
  return out;
}

nlohmann::json projection_payload(const SceneState& state) {
  const PointCloud3d cloud = current_cloud(state);
  std::vector<Eigen::Vector3d> positions(static_cast<std::size_t>(cloud.size()));
  std::vector<Eigen::Vector3d> colors(positions.size());
  std::vector<std::uint32_t> labels(positions.size());
  std::vector<std::uint32_t> ids(positions.size());
  for (std::size_t p = 0; p < positions.size(); ++p) {
    positions[p] = cloud.positions.row(static_cast<Eigen::Index>(p)).transpose();
    labels[p] = static_cast<std::uint32_t>(cloud.labels[p]);
    ids[p] = static_cast<std::uint32_t>(cloud.point_ids[p]);
    colors[p] = state.cluster_colors[static_cast<std::size_t>(cloud.labels[p])];
  }
  const Eigen::VectorXd opacity = depth_cue_opacities(cloud, view_depths(cloud), 1.0, 0.2);
  const Eigen::VectorXd influence = dimension_influence(state.basis);

  nlohmann::json dims = nlohmann::json::array();
  for (Eigen::Index d = 0; d < influence.size(); ++d) {
    dims.push_back({{"name", state.data.column_names[static_cast<std::size_t>(d)]}, {"influence", influence[d]}});
  }
  nlohmann::json basis = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index d = 0; d < state.basis.dims(); ++d) row.push_back(state.basis.rows(r, d));
    basis.push_back(row);
  }
  nlohmann::json clusters = nlohmann::json::array();
  for (const auto& c : state.cluster_colors) clusters.push_back(color_json(c));

  return {{"kind", "projection"},
          {"points", cloud.size()},
          {"positions", encode_f32(positions)},
          {"labels", encode_u32(labels)},
          {"point_ids", encode_u32(ids)},
          {"colors", encode_f32(colors)},
          {"opacity", encode_f32(std::span<const double>(opacity.data(), static_cast<std::size_t>(opacity.size())))},
          {"dimensions", dims},
          {"basis", basis},
          {"cluster_colors", clusters},
          {"cluster_names", state.data.label_names},
          {"stale", state.stale}};
}

nlohmann::json mesh_payload(const SceneState& state) {
  if (!state.current) throw Error("no scene has been built");
  const Scene& scene = *state.current;
  nlohmann::json meshes = nlohmann::json::array();
  for (const auto& m : scene.meshes) {
    std::vector<std::uint32_t> indices;
    indices.reserve(m.triangles.size() * 3);
    for (const auto& t : m.triangles) indices.insert(indices.end(), t.begin(), t.end());
    meshes.push_back({{"cluster", m.cluster},
                      {"layer", m.layer},
                      {"iso", m.iso},
                      {"opacity", served_opacity(state.params, m)},
                      {"base_color", color_json(m.base_color)},
                      {"positions", encode_f32(m.vertices)},
                      {"normals", encode_f32(m.normals)},
                      {"colors", encode_f32(m.colors)},
                      {"indices", encode_u32(indices)}});
  }
  const PointCloud3d cloud = project(state.data, scene.basis);
  std::vector<Eigen::Vector3d> outlier_positions;
  std::vector<std::uint32_t> outlier_ids;
  for (const auto p : scene.outliers) {
    outlier_positions.push_back(cloud.positions.row(p).transpose());
    outlier_ids.push_back(static_cast<std::uint32_t>(cloud.point_ids[static_cast<std::size_t>(p)]));
  }
  return {{"kind", "meshes"},
          {"meshes", meshes},
          {"outliers", {{"positions", encode_f32(outlier_positions)}, {"point_ids", encode_u32(outlier_ids)}}},
          {"build_seconds", scene.build_seconds},
          {"stale", state.stale}};
}

nlohmann::json mode_payload(const SceneState& state) {
  nlohmann::json out{{"mode", to_string(state.params.mode)}};
  switch (state.params.mode) {
    case DisplayMode::Scatter:
      out["points"] = projection_payload(state);
      break;
    case DisplayMode::Shape: {
      auto meshes = mesh_payload(state);
      if (!state.params.show_outliers) meshes.erase("outliers");
      out["shapes"] = std::move(meshes);
      break;
    }
    case DisplayMode::Combo: {
      auto meshes = mesh_payload(state);
      if (!state.params.show_outliers) meshes.erase("outliers");
      out["shapes"] = std::move(meshes);
      out["points"] = projection_payload(state);
      break;
    }
  }
  return out;
}

nlohmann::json params_to_json(const SceneParams& p) {
  nlohmann::json ao{{"n_directions", p.ao.n_directions}, {"ambient_floor", p.ao.ambient_floor}};
  ao["max_distance"] = p.ao.max_distance ? nlohmann::json(*p.ao.max_distance) : nlohmann::json(nullptr);
  ao["step"] = p.ao.step ? nlohmann::json(*p.ao.step) : nlohmann::json(nullptr);
  return {{"mode", to_string(p.mode)},
          {"opacity", p.opacity},
          {"layers", p.layers},
          {"tau_out_fraction", p.tau_out_fraction},
          {"resolution", p.resolution},
          {"filter_half_width", p.filter_half_width},
          {"iterations", p.iterations},
          {"show_outliers", p.show_outliers},
          {"ao", ao}};
}

SceneParams apply_params_delta(SceneParams p, const nlohmann::json& delta) {
  if (!delta.is_object()) throw Error("params delta must be an object");
  for (const auto& [key, value] : delta.items()) {
    if (key == "mode") {
      p.mode = parse_display_mode(value.get<std::string>());
    } else if (key == "opacity") {
      p.opacity = value.get<double>();
    } else if (key == "layers") {
      p.layers = value.get<int>();
    } else if (key == "tau_out_fraction") {
      p.tau_out_fraction = value.get<double>();
    } else if (key == "resolution") {
      p.resolution = value.get<int>();
    } else if (key == "filter_half_width") {
      p.filter_half_width = value.get<int>();
    } else if (key == "iterations") {
      p.iterations = value.get<int>();
    } else if (key == "show_outliers") {
      p.show_outliers = value.get<bool>();
    } else if (key == "ao") {
      if (!value.is_object()) throw Error("ao params must be an object");
      for (const auto& [ak, av] : value.items()) {
        if (ak == "n_directions") {
          p.ao.n_directions = av.get<int>();
        } else if (ak == "ambient_floor") {
          p.ao.ambient_floor = av.get<double>();
        } else if (ak == "max_distance") {
          p.ao.max_distance = av.is_null() ? std::nullopt : std::optional<double>(av.get<double>());
        } else if (ak == "step") {
          p.ao.step = av.is_null() ? std::nullopt : std::optional<double>(av.get<double>());
        } else {
          throw Error("unknown ao parameter '" + ak + "'");
        }
      }
    } else {
      throw Error("unknown parameter '" + key + "'");
    }
  }
  p.validate();
  return p;
}

}  // namespace subshape
