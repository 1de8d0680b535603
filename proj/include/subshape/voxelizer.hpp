#pragma once

// Point cloud -> per-cluster density grids. Points are splatted with
// trilinear weights (the adjoint of trilinear sampling) and then smoothed with
// repeated normalized box filters. Fields are stored x-fastest:
// index = x + nx * (y + ny * z).

#include "subshape/error.hpp"
#include "subshape/subspace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace subshape {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using Field = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
struct GridSpec {
  Eigen::Vector3i resolution{2, 2, 2};  // vertex counts
  Vec3<Scalar> origin = Vec3<Scalar>::Zero();
  Vec3<Scalar> spacing = Vec3<Scalar>::Ones();
  Eigen::Vector3i interior_cells{1, 1, 1};
  int pad_voxels = 0;

  Eigen::Index vertex_count() const {
    return Eigen::Index(resolution.x()) * resolution.y() * resolution.z();
  }
  Eigen::Index index(int x, int y, int z) const {
    return x + Eigen::Index(resolution.x()) * (y + Eigen::Index(resolution.y()) * z);
  }
  Vec3<Scalar> vertex_position(int x, int y, int z) const {
    return origin + spacing.cwiseProduct(Vec3<Scalar>(Scalar(x), Scalar(y), Scalar(z)));
  }
  Vec3<Scalar> upper_corner() const {
    return vertex_position(resolution.x() - 1, resolution.y() - 1, resolution.z() - 1);
  }
  Vec3<Scalar> extent() const { return upper_corner() - origin; }
  Scalar voxel() const { return spacing.maxCoeff(); }
};

template <typename Scalar>
struct DensityGrid {
  GridSpec<Scalar> spec;
  std::vector<Field<Scalar>> fields;  // one per cluster id
  std::vector<int> counts;            // points splatted per cluster

  int n_clusters() const { return static_cast<int>(fields.size()); }
  const Field<Scalar>& field(int cluster) const {
    if (cluster < 0 || cluster >= n_clusters()) throw Error("cluster id out of range");
    return fields[static_cast<std::size_t>(cluster)];
  }
};

using GridSpecd = GridSpec<double>;
using DensityGridd = DensityGrid<double>;

/// Upper bound on grid vertices (2 GiB per double field).
inline constexpr std::int64_t kMaxGridVertices = std::int64_t(1) << 28;

inline int required_padding(int filter_half_width, int iterations) {
  return iterations * filter_half_width + 1;
}

/// Cubic-voxel grid enclosing the cloud. The longest bounding-box axis gets
/// `resolution` interior cells; every side is padded so that K passes of a
/// half-width-h filter can never reach the outermost vertex shell.
template <typename Scalar>
GridSpec<Scalar> grid_spec_for(const PointCloud3<Scalar>& cloud, int resolution, int filter_half_width,
                               int iterations) {
  if (cloud.size() == 0) throw Error("empty cloud");
  if (resolution < 8) throw Error("grid resolution must be at least 8");
  if (filter_half_width < 0 || iterations < 0) throw Error("filter parameters must be non-negative");

  const Vec3<Scalar> lo = cloud.positions.colwise().minCoeff().transpose();
  const Vec3<Scalar> hi = cloud.positions.colwise().maxCoeff().transpose();
  const Vec3<Scalar> extent = hi - lo;
  Eigen::Index longest = 0;
  const Scalar longest_extent = extent.maxCoeff(&longest);

  GridSpec<Scalar> spec;
  spec.pad_voxels = required_padding(filter_half_width, iterations);
  const Scalar voxel = longest_extent > Scalar(0) ? longest_extent / Scalar(resolution) : Scalar(1) / Scalar(resolution);
  spec.spacing.setConstant(voxel);

  Vec3<Scalar> interior_lo;
  for (int a = 0; a < 3; ++a) {
    int cells = 1;
    if (longest_extent > Scalar(0) && a == longest) {
      cells = resolution;
    } else if (extent[a] > Scalar(0)) {
      // Shave a relative epsilon so an exact multiple does not round up.
      cells = std::max(1, static_cast<int>(std::ceil(extent[a] / voxel * (Scalar(1) - Scalar(1e-12)))));
    }
    spec.interior_cells[a] = cells;
    const Scalar slack = Scalar(cells) * voxel - extent[a];
    interior_lo[a] = lo[a] - std::max(Scalar(0), slack) / Scalar(2);
    spec.resolution[a] = cells + 2 * spec.pad_voxels + 1;
  }
  const std::int64_t vertices = std::int64_t(spec.resolution.x()) * spec.resolution.y() * spec.resolution.z();
  if (vertices > kMaxGridVertices) {
    throw Error("grid of " + std::to_string(vertices) + " vertices exceeds the limit of " +
                std::to_string(kMaxGridVertices));
  }
  spec.origin = interior_lo - Scalar(spec.pad_voxels) * spec.spacing;
  return spec;
}

/// Eight vertex indices and trilinear weights of the cell enclosing a point.
template <typename Scalar>
struct TrilinearStencil {
  std::array<Eigen::Index, 8> index{};
  std::array<Scalar, 8> weight{};
};

/// Corner c of a cell is offset by (c & 1, (c >> 1) & 1, (c >> 2) & 1).
/// Returns nullopt when the point lies outside the grid. When `interior_only`
/// is set, cells are restricted to the unpadded interior.
template <typename Scalar>
std::optional<TrilinearStencil<Scalar>> trilinear_stencil(const GridSpec<Scalar>& spec, const Vec3<Scalar>& p,
                                                          bool interior_only = false) {
  std::array<int, 3> cell{};
  std::array<Scalar, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const Scalar g = (p[a] - spec.origin[a]) / spec.spacing[a];
    int lo_cell = 0;
    int hi_cell = spec.resolution[a] - 2;
    if (interior_only) {
      lo_cell = spec.pad_voxels;
      hi_cell = spec.pad_voxels + spec.interior_cells[a] - 1;
    }
    const Scalar tol = Scalar(1e-6);
    if (!(g >= Scalar(lo_cell) - tol && g <= Scalar(hi_cell + 1) + tol)) return std::nullopt;
    const int c = std::clamp(static_cast<int>(std::floor(g)), lo_cell, hi_cell);
    cell[static_cast<std::size_t>(a)] = c;
    frac[static_cast<std::size_t>(a)] = std::clamp(g - Scalar(c), Scalar(0), Scalar(1));
  }
  TrilinearStencil<Scalar> s;
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const Scalar wx = dx ? frac[0] : Scalar(1) - frac[0];
    const Scalar wy = dy ? frac[1] : Scalar(1) - frac[1];
    const Scalar wz = dz ? frac[2] : Scalar(1) - frac[2];
    s.index[static_cast<std::size_t>(c)] = spec.index(cell[0] + dx, cell[1] + dy, cell[2] + dz);
    s.weight[static_cast<std::size_t>(c)] = wx * wy * wz;
  }
  return s;
}

/// Deposits each point's unit mass onto its enclosing cell's vertices.
template <typename Scalar>
DensityGrid<Scalar> splat(const PointCloud3<Scalar>& cloud, const GridSpec<Scalar>& spec) {
  int n_clusters = 0;
  for (const int l : cloud.labels) {
    if (l < 0) throw Error("negative cluster label");
    n_clusters = std::max(n_clusters, l + 1);
  }
  if (static_cast<Eigen::Index>(cloud.labels.size()) != cloud.size()) throw Error("label count mismatch");

  DensityGrid<Scalar> grid;
  grid.spec = spec;
  grid.fields.assign(static_cast<std::size_t>(n_clusters), Field<Scalar>::Zero(spec.vertex_count()));
  grid.counts.assign(static_cast<std::size_t>(n_clusters), 0);
  for (Eigen::Index p = 0; p < cloud.size(); ++p) {
    const Vec3<Scalar> pos = cloud.positions.row(p).transpose();
    const auto stencil = trilinear_stencil(spec, pos, true);
    if (!stencil) throw Error("point " + std::to_string(p) + " lies outside the grid interior");
    const auto label = static_cast<std::size_t>(cloud.labels[static_cast<std::size_t>(p)]);
    auto& f = grid.fields[label];
    for (std::size_t c = 0; c < 8; ++c) f[stencil->index[c]] += stencil->weight[c];
    ++grid.counts[label];
  }
  return grid;
}

/// K passes of the normalized (2h+1)^3 mean filter, applied as three 1D
/// passes per iteration. Values outside the grid are treated as zero.
template <typename Scalar>
Field<Scalar> box_filter_field(const Field<Scalar>& field, const Eigen::Vector3i& dims, int half_width,
                               int iterations) {
  if (half_width < 1) throw Error("filter half-width must be at least 1");
  if (iterations < 0) throw Error("iteration count must be non-negative");
  if (field.size() != Eigen::Index(dims.x()) * dims.y() * dims.z()) throw Error("field size mismatch");

  const Scalar norm = Scalar(1) / Scalar(2 * half_width + 1);
  const std::array<Eigen::Index, 3> stride{1, dims.x(), Eigen::Index(dims.x()) * dims.y()};
  Field<Scalar> cur = field;
  Field<Scalar> next(field.size());
  for (int it = 0; it < iterations; ++it) {
    for (int axis = 0; axis < 3; ++axis) {
      const int n = dims[axis];
      const Eigen::Index s = stride[static_cast<std::size_t>(axis)];
      const int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
      const Eigen::Index s1 = stride[static_cast<std::size_t>(o1)];
      const Eigen::Index s2 = stride[static_cast<std::size_t>(o2)];
      for (int j2 = 0; j2 < dims[o2]; ++j2) {
        for (int j1 = 0; j1 < dims[o1]; ++j1) {
          const Eigen::Index base = j1 * s1 + j2 * s2;
          for (int i = 0; i < n; ++i) {
            Scalar acc = Scalar(0);
            const int from = std::max(0, i - half_width);
            const int to = std::min(n - 1, i + half_width);
            for (int k = from; k <= to; ++k) acc += cur[base + k * s];
            next[base + i * s] = acc * norm;
          }
        }
      }
      std::swap(cur, next);
    }
  }
  return cur;
}

template <typename Scalar>
DensityGrid<Scalar> box_filter(DensityGrid<Scalar> grid, int half_width, int iterations) {
  if (grid.spec.pad_voxels < required_padding(half_width, iterations)) {
    throw Error("insufficient padding: grid has " + std::to_string(grid.spec.pad_voxels) + " pad voxels, filter needs " +
                std::to_string(required_padding(half_width, iterations)));
  }
  for (auto& f : grid.fields) f = box_filter_field(f, grid.spec.resolution, half_width, iterations);
  return grid;
}

template <typename Scalar>
Scalar sample_field(const GridSpec<Scalar>& spec, const Field<Scalar>& field, const Vec3<Scalar>& p) {
  const auto s = trilinear_stencil(spec, p);
  if (!s) return Scalar(0);
  Scalar acc = Scalar(0);
  for (std::size_t c = 0; c < 8; ++c) acc += s->weight[c] * field[s->index[c]];
  return acc;
}

/// Trilinear interpolation of a cluster's field. Zero outside the grid.
template <typename Scalar>
Scalar sample_density(const DensityGrid<Scalar>& grid, int cluster, const Vec3<Scalar>& p) {
  return sample_field(grid.spec, grid.field(cluster), p);
}

/// Debug dump: text header terminated by "end\n", then nx*ny*nz 32-bit
/// little-endian floats in x-fastest order.
template <typename Scalar>
void write_field_dump(std::ostream& out, const DensityGrid<Scalar>& grid, int cluster) {
  const auto& spec = grid.spec;
  const auto& f = grid.field(cluster);
  out.precision(17);
  out << "subshape-field 1\n"
      << "resolution " << spec.resolution.x() << ' ' << spec.resolution.y() << ' ' << spec.resolution.z() << '\n'
      << "origin " << spec.origin.x() << ' ' << spec.origin.y() << ' ' << spec.origin.z() << '\n'
      << "spacing " << spec.spacing.x() << ' ' << spec.spacing.y() << ' ' << spec.spacing.z() << '\n'
      << "cluster " << cluster << '\n'
      << "end\n";
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(f[i]));
    const char bytes[4] = {static_cast<char>(bits & 0xff), static_cast<char>((bits >> 8) & 0xff),
                           static_cast<char>((bits >> 16) & 0xff), static_cast<char>((bits >> 24) & 0xff)};
    out.write(bytes, 4);
  }
}

struct FieldDump {
  Eigen::Vector3i resolution;
  Eigen::Vector3d origin;
  Eigen::Vector3d spacing;
  int cluster = 0;
  std::vector<float> values;
};

inline FieldDump read_field_dump(std::istream& in) {
  FieldDump d;
  std::string key;
  in >> key;
  int version = 0;
  in >> version;
  if (key != "subshape-field" || version != 1) throw Error("not a field dump");
  while (in >> key && key != "end") {
    if (key == "resolution") {
      in >> d.resolution.x() >> d.resolution.y() >> d.resolution.z();
    } else if (key == "origin") {
      in >> d.origin.x() >> d.origin.y() >> d.origin.z();
    } else if (key == "spacing") {
      in >> d.spacing.x() >> d.spacing.y() >> d.spacing.z();
    } else if (key == "cluster") {
      in >> d.cluster;
    } else {
      throw Error("unknown field dump key '" + key + "'");
    }
  }
  in.get();  // newline after "end"
  const auto n = static_cast<std::size_t>(d.resolution.x()) * d.resolution.y() * d.resolution.z();
  d.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error("truncated field dump");
    const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
                               (std::uint32_t(b[3]) << 24);
    d.values[i] = std::bit_cast<float>(bits);
  }
  return d;
}

}  // namespace subshape
