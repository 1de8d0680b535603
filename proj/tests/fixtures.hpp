#pragma once

// Shared inputs for the test suites.

#include "subshape/dataset.hpp"
#include "subshape/isosurface.hpp"
#include "subshape/subspace.hpp"
#include "subshape/voxelizer.hpp"

#include <string>
#include <vector>

namespace fixture {

inline std::string iris_path() { return std::string(SUBSHAPE_DATA_DIR) + "/iris.csv"; }

inline subshape::Dataset iris() {
  return subshape::normalize_columns(subshape::load_table_file(iris_path(), std::string("class")));
}

inline subshape::PointCloud3d iris_cloud(int i = 0, int j = 1, int k = 2) {
  const auto data = iris();
  return subshape::project(data, subshape::axis_basis(i, j, k, data.n_dims()));
}

inline subshape::DensityGridd density(const subshape::PointCloud3d& cloud, int resolution = 64, int h = 1, int k = 3) {
  return subshape::box_filter(subshape::splat(cloud, subshape::grid_spec_for(cloud, resolution, h, k)), h, k);
}

inline subshape::PointCloud3d cloud_from(const std::vector<Eigen::Vector3d>& pts, const std::vector<int>& labels) {
  subshape::PointCloud3d c;
  c.positions.resize(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c.positions.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
    c.point_ids.push_back(static_cast<int>(i));
  }
  c.labels = labels;
  return c;
}

// Slightly rotated cubic lattice clipped to a ball: a sphere-shaped cluster
// with a smooth density field.
inline std::vector<Eigen::Vector3d> lattice_ball(const Eigen::Vector3d& center, double radius, double pitch) {
  const Eigen::Matrix3d rot = (Eigen::AngleAxisd(0.11, Eigen::Vector3d::UnitX()) *
                               Eigen::AngleAxisd(0.07, Eigen::Vector3d::UnitY())).toRotationMatrix();
  std::vector<Eigen::Vector3d> pts;
  const int n = static_cast<int>(radius / pitch) + 1;
  for (int z = -n; z <= n; ++z)
    for (int y = -n; y <= n; ++y)
      for (int x = -n; x <= n; ++x) {
        const Eigen::Vector3d q = rot * (pitch * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5));
        if (q.norm() <= radius) pts.push_back(center + q);
      }
  return pts;
}

// Ball cluster 0 and a small separate cluster 1.
struct BallScene {
  Eigen::Vector3d center{0.5, 0.5, 0.45};
  subshape::PointCloud3d cloud;
  subshape::DensityGridd grid;
  subshape::IsoLayerMesh outer;

  explicit BallScene(int resolution = 32, double pitch = 0.02) {
    auto pts = lattice_ball(center, 0.3, pitch);
    std::vector<int> labels(pts.size(), 0);
    for (const auto& q : lattice_ball(Eigen::Vector3d(0.05, 0.1, 0.9), 0.05, 0.02)) {
      pts.push_back(q);
      labels.push_back(1);
    }
    cloud = cloud_from(pts, labels);
    grid = density(cloud, resolution);
    outer = subshape::extract_layers(grid, 0, 1, 1.0, 0.1 * grid.fields[0].maxCoeff()).front();
  }
};

}  // namespace fixture
