#include "subshape/mesh.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace subshape {

Eigen::Vector3d triangle_normal(const IsoLayerMesh& mesh, std::size_t tri) {
  const auto& t = mesh.triangles[tri];
  const Eigen::Vector3d& a = mesh.vertices[t[0]];
  const Eigen::Vector3d& b = mesh.vertices[t[1]];
  const Eigen::Vector3d& c = mesh.vertices[t[2]];
  return 0.5 * (b - a).cross(c - a);
}

double triangle_area(const IsoLayerMesh& mesh, std::size_t tri) { return triangle_normal(mesh, tri).norm(); }

MeshAudit audit_mesh(const IsoLayerMesh& mesh, double area_threshold) {
  MeshAudit audit;
  struct EdgeUse {
    int count = 0;
    int forward = 0;  // uses running from the lower to the higher index
  };
  std::unordered_map<std::uint64_t, EdgeUse> uses;
  uses.reserve(mesh.triangles.size() * 2);
  audit.min_area = mesh.triangles.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      std::uint64_t a = tri[static_cast<std::size_t>(e)];
      std::uint64_t b = tri[static_cast<std::size_t>((e + 1) % 3)];
      const bool forward = a < b;
      if (!forward) std::swap(a, b);
      auto& use = uses[(a << 32) | b];
      ++use.count;
      use.forward += forward ? 1 : 0;
    }
    const Eigen::Vector3d n = triangle_normal(mesh, t);
    const double area = n.norm();
    audit.min_area = std::min(audit.min_area, area);
    if (!(area > area_threshold)) ++audit.degenerate_triangles;
    if (mesh.normals.size() == mesh.vertices.size()) {
      const Eigen::Vector3d vn = mesh.normals[tri[0]] + mesh.normals[tri[1]] + mesh.normals[tri[2]];
      if (!(n.dot(vn) > 0.0)) ++audit.misoriented_triangles;
    }
  }
  audit.edges = uses.size();
  for (const auto& [key, use] : uses) {
    if (use.count != 2) ++audit.bad_edges;
    else if (use.forward != 1) ++audit.inconsistent_edges;
  }
  return audit;
}

Eigen::AlignedBox3d mesh_bounds(const IsoLayerMesh& mesh) {
  Eigen::AlignedBox3d box;
  for (const auto& v : mesh.vertices) box.extend(v);
  return box;
}

Eigen::Vector3d cluster_color(int cluster) {
  // Tableau 10
  static const std::array<Eigen::Vector3d, 10> palette{
      Eigen::Vector3d(0.122, 0.467, 0.706), Eigen::Vector3d(1.000, 0.498, 0.055),
      Eigen::Vector3d(0.173, 0.627, 0.173), Eigen::Vector3d(0.839, 0.153, 0.157),
      Eigen::Vector3d(0.580, 0.404, 0.741), Eigen::Vector3d(0.549, 0.337, 0.294),
      Eigen::Vector3d(0.890, 0.467, 0.761), Eigen::Vector3d(0.498, 0.498, 0.498),
      Eigen::Vector3d(0.737, 0.741, 0.133), Eigen::Vector3d(0.090, 0.745, 0.812)};
  const auto n = static_cast<int>(palette.size());
  return palette[static_cast<std::size_t>(((cluster % n) + n) % n)];
}

}  // namespace subshape
