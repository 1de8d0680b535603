#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

namespace subshape {

using Triangle = std::array<std::uint32_t, 3>;

/// One nested iso-surface of one cluster. Layer 0 is the outermost.
struct IsoLayerMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Triangle> triangles;
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> occlusion;         // filled by bake_occlusion
  std::vector<Eigen::Vector3d> colors;   // filled by shade_vertices
  int cluster = 0;
  int layer = 0;
  double iso = 0.0;
  double opacity = 1.0;
  Eigen::Vector3d base_color = Eigen::Vector3d::Constant(0.7);

  bool empty() const { return triangles.empty(); }
};

Eigen::Vector3d triangle_normal(const IsoLayerMesh& mesh, std::size_t tri);  // area-weighted, unnormalized
double triangle_area(const IsoLayerMesh& mesh, std::size_t tri);

struct MeshAudit {
  std::size_t edges = 0;
  std::size_t bad_edges = 0;             // edges not used by exactly two triangles
  std::size_t inconsistent_edges = 0;    // two-triangle edges traversed the same way by both
  std::size_t degenerate_triangles = 0;  // area at or below the threshold
  std::size_t misoriented_triangles = 0; // face normal disagrees with its vertex normals
  double min_area = 0.0;

  bool watertight() const { return bad_edges == 0; }
  bool consistently_wound() const { return bad_edges == 0 && inconsistent_edges == 0; }
};

MeshAudit audit_mesh(const IsoLayerMesh& mesh, double area_threshold = 1e-12);

Eigen::AlignedBox3d mesh_bounds(const IsoLayerMesh& mesh);

/// Fixed categorical palette keyed by cluster id.
Eigen::Vector3d cluster_color(int cluster);

}  // namespace subshape
