#pragma once

#include "subshape/mesh.hpp"
#include "subshape/subspace.hpp"
#include "subshape/voxelizer.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace subshape {

/// Points whose own-cluster density falls below that cluster's outer iso
/// value, i.e. the points left outside their shape.
std::vector<Eigen::Index> detect_outliers(const PointCloud3d& cloud, const DensityGridd& grid,
                                          std::span<const double> tau_per_cluster);

std::vector<Eigen::Index> detect_outliers(const PointCloud3d& cloud, const DensityGridd& grid, double tau_out);

/// Linear map from [nearest, farthest] depth to [alpha_max, alpha_min].
Eigen::VectorXd depth_cue_opacities(const Eigen::VectorXd& depths, double alpha_max, double alpha_min);

Eigen::VectorXd depth_cue_opacities(const PointCloud3d& cloud, const Eigen::VectorXd& depths, double alpha_max,
                                    double alpha_min);

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c);

/// Bounding-volume hierarchy over a mesh's triangles for nearest-triangle
/// queries. Ties go to the lower triangle index.
class TriangleLocator {
public:
  explicit TriangleLocator(const IsoLayerMesh& mesh);

  struct Hit {
    std::uint32_t triangle = 0;
    double distance_sq = 0.0;
  };
  Hit nearest(const Eigen::Vector3d& p) const;

private:
  struct Node {
    Eigen::AlignedBox3d box;
    std::uint32_t begin = 0, end = 0;  // range in order_ when leaf
    std::int32_t left = -1, right = -1;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  const IsoLayerMesh& mesh_;
  std::vector<std::uint32_t> order_;
  std::vector<Eigen::Vector3d> centroid_;
  std::vector<Node> nodes_;
};

struct BrushStroke {
  int cluster = 0;                     // touched shape
  std::vector<std::uint32_t> painted;  // triangle indices on its layer-0 mesh
  int new_cluster = 0;
  Eigen::Vector3d color = Eigen::Vector3d::Ones();
};

/// Reassigns every point of the touched cluster whose nearest layer-0
/// triangle was painted. Interior points follow the surface patch nearest
/// to them. Returns the full updated label vector.
std::vector<int> brush_assign(const BrushStroke& stroke, const IsoLayerMesh& outer, const PointCloud3d& cloud);

}  // namespace subshape
