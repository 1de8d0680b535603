#include "subshape/analysis.hpp"

#include "subshape/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace subshape {

std::vector<Eigen::Index> detect_outliers(const PointCloud3d& cloud, const DensityGridd& grid,
                                          std::span<const double> tau_per_cluster) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index p = 0; p < cloud.size(); ++p) {
    const int label = cloud.labels[static_cast<std::size_t>(p)];
    if (label < 0 || static_cast<std::size_t>(label) >= tau_per_cluster.size()) {
      throw Error("no outer iso value for cluster " + std::to_string(label));
    }
    const double density = sample_density(grid, label, Eigen::Vector3d(cloud.positions.row(p).transpose()));
    if (density < tau_per_cluster[static_cast<std::size_t>(label)]) out.push_back(p);
  }
  return out;
}

std::vector<Eigen::Index> detect_outliers(const PointCloud3d& cloud, const DensityGridd& grid, double tau_out) {
  const std::vector<double> tau(static_cast<std::size_t>(grid.n_clusters()), tau_out);
  return detect_outliers(cloud, grid, tau);
}

Eigen::VectorXd depth_cue_opacities(const Eigen::VectorXd& depths, double alpha_max, double alpha_min) {
  if (!(alpha_max >= alpha_min && alpha_min >= 0.0)) throw Error("depth cue needs alpha_max >= alpha_min >= 0");
  if (depths.size() == 0) return {};
  const double near = depths.minCoeff();
  const double far = depths.maxCoeff();
  if (!(far > near)) return Eigen::VectorXd::Constant(depths.size(), alpha_max);
  return (alpha_max + (depths.array() - near) / (far - near) * (alpha_min - alpha_max)).matrix();
}

Eigen::VectorXd depth_cue_opacities(const PointCloud3d& cloud, const Eigen::VectorXd& depths, double alpha_max,
                                    double alpha_min) {
  if (depths.size() != cloud.size()) throw Error("one depth per point required");
  return depth_cue_opacities(depths, alpha_max, alpha_min);
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

TriangleLocator::TriangleLocator(const IsoLayerMesh& mesh) : mesh_(mesh) {
  const auto n = static_cast<std::uint32_t>(mesh.triangles.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);
  centroid_.reserve(n);
  for (const auto& t : mesh.triangles) {
    centroid_.push_back((mesh.vertices[t[0]] + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0);
  }
  if (n > 0) build(0, n);
}

std::int32_t TriangleLocator::build(std::uint32_t begin, std::uint32_t end) {
  Node node;
  node.begin = begin;
  node.end = end;
  Eigen::AlignedBox3d centroid_box;
  for (std::uint32_t i = begin; i < end; ++i) {
    const auto& t = mesh_.triangles[order_[i]];
    for (const auto v : t) node.box.extend(mesh_.vertices[v]);
    centroid_box.extend(centroid_[order_[i]]);
  }
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 8) return id;

  Eigen::Index axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t x, std::uint32_t y) {
                     const double cx = centroid_[x][axis], cy = centroid_[y][axis];
                     return cx < cy || (cx == cy && x < y);
                   });
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

TriangleLocator::Hit TriangleLocator::nearest(const Eigen::Vector3d& p) const {
  Hit best{std::numeric_limits<std::uint32_t>::max(), std::numeric_limits<double>::infinity()};
  if (nodes_.empty()) throw Error("nearest-triangle query on an empty mesh");
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.box.squaredExteriorDistance(p) > best.distance_sq) continue;
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const std::uint32_t tri = order_[i];
        const auto& t = mesh_.triangles[tri];
        const Eigen::Vector3d q =
            closest_point_on_triangle(p, mesh_.vertices[t[0]], mesh_.vertices[t[1]], mesh_.vertices[t[2]]);
        const double d = (q - p).squaredNorm();
        if (d < best.distance_sq || (d == best.distance_sq && tri < best.triangle)) best = {tri, d};
      }
      continue;
    }
    const Node& l = nodes_[static_cast<std::size_t>(node.left)];
    const Node& r = nodes_[static_cast<std::size_t>(node.right)];
    // Visit the nearer child first.
    if (l.box.squaredExteriorDistance(p) <= r.box.squaredExteriorDistance(p)) {
      stack.push_back(node.right);
      stack.push_back(node.left);
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

std::vector<int> brush_assign(const BrushStroke& stroke, const IsoLayerMesh& outer, const PointCloud3d& cloud) {
  std::vector<int> labels = cloud.labels;
  if (stroke.painted.empty()) return labels;
  if (stroke.new_cluster == stroke.cluster) throw Error("brush must assign a different cluster");
  if (stroke.new_cluster < 0) throw Error("brush cluster id must be non-negative");
  if (outer.cluster != stroke.cluster || outer.layer != 0) throw Error("brush must target the touched cluster's outer layer");

  std::vector<char> painted(outer.triangles.size(), 0);
  for (const auto t : stroke.painted) {
    if (t >= outer.triangles.size()) throw Error("painted triangle index out of range");
    painted[t] = 1;
  }
  const TriangleLocator locator(outer);
  for (Eigen::Index p = 0; p < cloud.size(); ++p) {
    auto& label = labels[static_cast<std::size_t>(p)];
    if (label != stroke.cluster) continue;
    const auto hit = locator.nearest(cloud.positions.row(p).transpose());
    if (painted[hit.triangle]) label = stroke.new_cluster;
  }
  return labels;
}

}  // namespace subshape
