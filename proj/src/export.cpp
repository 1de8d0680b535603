#include "subshape/export.hpp"

#include "subshape/error.hpp"
#include "subshape/wire.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <filesystem>

namespace subshape {

namespace {

// Shortest text that reads back to the same float.
void append_float(std::string& out, double value) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(value));
  (void)ec;
  out.append(buf.data(), end);
}

void append_vec(std::string& out, const char* tag, const Eigen::Vector3d& v) {
  out += tag;
  for (int a = 0; a < 3; ++a) {
    out += ' ';
    append_float(out, v[a]);
  }
}

std::vector<Eigen::Vector3d> outlier_positions(const SceneState& state) {
  std::vector<Eigen::Vector3d> out;
  if (!state.params.show_outliers) return out;
  const Scene& scene = *state.current;
  const PointCloud3d cloud = project(state.data, scene.basis);
  for (const auto p : scene.outliers) out.push_back(cloud.positions.row(p).transpose());
  return out;
}

std::vector<ExportFile> export_obj(const SceneState& state, const std::string& stem) {
  const Scene& scene = *state.current;
  const std::string mtl_name = std::filesystem::path(stem).filename().string() + ".mtl";
  std::string obj = "# subshape scene\nmtllib " + mtl_name + "\n";
  std::string mtl = "# subshape materials\n";
  std::size_t base = 1;
  for (const auto& mesh : scene.meshes) {
    const std::string name = object_name(mesh);
    mtl += "newmtl " + name + "\n";
    append_vec(mtl, "Kd", mesh.base_color);
    mtl += "\nKa 0 0 0\nd ";
    append_float(mtl, mesh.opacity);
    mtl += "\nillum 1\n\n";

    obj += "o " + name + "\nusemtl " + name + "\n";
    const bool colored = mesh.colors.size() == mesh.vertices.size();
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      append_vec(obj, "v", mesh.vertices[v]);
      if (colored) {
        for (int a = 0; a < 3; ++a) {
          obj += ' ';
          append_float(obj, mesh.colors[v][a]);
        }
      }
      obj += '\n';
    }
    for (const auto& n : mesh.normals) {
      append_vec(obj, "vn", n);
      obj += '\n';
    }
    for (const auto& t : mesh.triangles) {
      obj += 'f';
      for (const auto i : t) {
        const std::string idx = std::to_string(base + i);
        obj += ' ' + idx + "//" + idx;
      }
      obj += '\n';
    }
    base += mesh.vertices.size();
  }
  const auto outliers = outlier_positions(state);
  if (!outliers.empty()) {
    obj += "o outliers\n";
    for (const auto& p : outliers) {
      append_vec(obj, "v", p);
      obj += '\n';
    }
    obj += 'p';
    for (std::size_t i = 0; i < outliers.size(); ++i) obj += ' ' + std::to_string(base + i);
    obj += '\n';
  }
  return {{stem + ".obj", std::move(obj)}, {stem + ".mtl", std::move(mtl)}};
}

class GltfBuilder {
public:
  int add_vec3(const std::vector<Eigen::Vector3d>& values, bool with_bounds) {
    const std::size_t offset = begin_view();
    Eigen::Vector3f lo = Eigen::Vector3f::Constant(std::numeric_limits<float>::infinity());
    Eigen::Vector3f hi = -lo;
    for (const auto& v : values) {
      const Eigen::Vector3f f = v.cast<float>();
      lo = lo.cwiseMin(f);
      hi = hi.cwiseMax(f);
      for (int a = 0; a < 3; ++a) put(std::bit_cast<std::uint32_t>(f[a]));
    }
    const int view = end_view(offset, 34962);
    nlohmann::json acc{{"bufferView", view}, {"componentType", 5126}, {"count", values.size()}, {"type", "VEC3"}};
    if (with_bounds) {
      acc["min"] = {lo.x(), lo.y(), lo.z()};
      acc["max"] = {hi.x(), hi.y(), hi.z()};
    }
    accessors_.push_back(std::move(acc));
    return static_cast<int>(accessors_.size()) - 1;
  }

  int add_indices(const std::vector<Triangle>& triangles) {
    const std::size_t offset = begin_view();
    for (const auto& t : triangles) {
      for (const auto i : t) put(i);
    }
    const int view = end_view(offset, 34963);
    accessors_.push_back({{"bufferView", view}, {"componentType", 5125}, {"count", triangles.size() * 3}, {"type", "SCALAR"}});
    return static_cast<int>(accessors_.size()) - 1;
  }

  nlohmann::json finish(nlohmann::json doc) {
    doc["accessors"] = accessors_;
    doc["bufferViews"] = views_;
    doc["buffers"] = nlohmann::json::array(
        {{{"byteLength", buffer_.size()}, {"uri", "data:application/octet-stream;base64," + base64_encode(buffer_)}}});
    return doc;
  }

private:
  std::size_t begin_view() {
    while (buffer_.size() % 4 != 0) buffer_.push_back('\0');
    return buffer_.size();
  }
  int end_view(std::size_t offset, int target) {
    views_.push_back({{"buffer", 0}, {"byteOffset", offset}, {"byteLength", buffer_.size() - offset}, {"target", target}});
    return static_cast<int>(views_.size()) - 1;
  }
  void put(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) buffer_.push_back(static_cast<char>((v >> s) & 0xff));
  }

  std::string buffer_;
  nlohmann::json views_ = nlohmann::json::array();
  nlohmann::json accessors_ = nlohmann::json::array();
};

std::vector<ExportFile> export_gltf(const SceneState& state, const std::string& stem) {
  const Scene& scene = *state.current;
  GltfBuilder builder;
  nlohmann::json nodes = nlohmann::json::array();
  nlohmann::json meshes = nlohmann::json::array();
  nlohmann::json materials = nlohmann::json::array();
  for (const auto& mesh : scene.meshes) {
    if (mesh.triangles.empty()) continue;
    const std::string name = object_name(mesh);
    const int position = builder.add_vec3(mesh.vertices, true);
    const int normal = builder.add_vec3(mesh.normals, false);
    const int color = builder.add_vec3(mesh.colors, false);
    const int indices = builder.add_indices(mesh.triangles);
    materials.push_back({{"name", name},
                         {"pbrMetallicRoughness",
                          {{"baseColorFactor", {1.0, 1.0, 1.0, mesh.opacity}}, {"metallicFactor", 0.0}, {"roughnessFactor", 1.0}}},
                         {"alphaMode", mesh.opacity < 1.0 ? "BLEND" : "OPAQUE"}});
    meshes.push_back({{"name", name},
                      {"primitives",
                       {{{"attributes", {{"POSITION", position}, {"NORMAL", normal}, {"COLOR_0", color}}},
                         {"indices", indices},
                         {"material", static_cast<int>(materials.size()) - 1},
                         {"mode", 4}}}}});
    nodes.push_back({{"name", name},
                     {"mesh", static_cast<int>(meshes.size()) - 1},
                     {"extras", {{"cluster", mesh.cluster}, {"layer", mesh.layer}, {"iso", mesh.iso}}}});
  }
  const auto outliers = outlier_positions(state);
  if (!outliers.empty()) {
    const int position = builder.add_vec3(outliers, true);
    meshes.push_back({{"name", "outliers"}, {"primitives", {{{"attributes", {{"POSITION", position}}}, {"mode", 0}}}}});
    nodes.push_back({{"name", "outliers"}, {"mesh", static_cast<int>(meshes.size()) - 1}});
  }
  nlohmann::json scene_nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes.size(); ++i) scene_nodes.push_back(i);

  nlohmann::json doc{{"asset", {{"version", "2.0"}, {"generator", "subshape"}}},
                     {"scene", 0},
                     {"scenes", {{{"nodes", scene_nodes}}}},
                     {"nodes", nodes}};
  if (!meshes.empty()) doc["meshes"] = meshes;
  if (!materials.empty()) doc["materials"] = materials;
  doc = builder.finish(std::move(doc));
  return {{stem + ".gltf", doc.dump(1) + "\n"}};
}

}  // namespace

ExportFormat parse_export_format(const std::string& text) {
  if (text == "obj") return ExportFormat::Obj;
  if (text == "gltf") return ExportFormat::Gltf;
  throw Error("unknown export format '" + text + "'");
}

std::string object_name(const IsoLayerMesh& mesh) {
  return "cluster" + std::to_string(mesh.cluster) + "_layer" + std::to_string(mesh.layer);
}

std::vector<ExportFile> export_scene(const SceneState& state, ExportFormat format, const std::string& stem) {
  if (!state.current || state.current->meshes.empty()) throw Error("no meshes built");
  return format == ExportFormat::Obj ? export_obj(state, stem) : export_gltf(state, stem);
}

}  // namespace subshape
