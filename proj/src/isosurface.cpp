#include "subshape/isosurface.hpp"

#include "subshape/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace subshape {

namespace {

// Six tetrahedra around the cell diagonal 0-7, one per axis permutation.
// Corner c sits at offset (c & 1, (c >> 1) & 1, (c >> 2) & 1). Every edge
// joins two corners where one bitmask contains the other, so neighbouring
// cells cut their shared faces along the same diagonals.
constexpr std::array<std::array<int, 4>, 6> kTets{{
    {0, 1, 3, 7},
    {0, 1, 5, 7},
    {0, 2, 3, 7},
    {0, 2, 6, 7},
    {0, 4, 5, 7},
    {0, 4, 6, 7},
}};

class Contourer {
public:
  Contourer(const GridSpecd& spec, const Field<double>& field, double iso, IsoLayerMesh& mesh)
      : spec_(spec), field_(field), iso_(iso), mesh_(mesh) {}

  void run() {
    const auto& res = spec_.resolution;
    edge_vertex_.reserve(4096);
    for (int z = 0; z + 1 < res.z(); ++z) {
      for (int y = 0; y + 1 < res.y(); ++y) {
        for (int x = 0; x + 1 < res.x(); ++x) contour_cell(x, y, z);
      }
    }
  }

private:
  void contour_cell(int x, int y, int z) {
    std::array<double, 8> value{};
    int above = 0;
    for (int c = 0; c < 8; ++c) {
      value[static_cast<std::size_t>(c)] = field_[spec_.index(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1))];
      if (value[static_cast<std::size_t>(c)] > iso_) ++above;
    }
    if (above == 0 || above == 8) return;
    cell_ = {x, y, z};
    value_ = value;
    for (const auto& tet : kTets) contour_tet(tet);
  }

  Eigen::Vector3d corner_position(int c) const {
    return spec_.vertex_position(cell_[0] + (c & 1), cell_[1] + ((c >> 1) & 1), cell_[2] + ((c >> 2) & 1));
  }

  std::uint32_t edge_vertex(int ca, int cb) {
    if ((ca & cb) != ca) std::swap(ca, cb);  // ca is the lower corner
    const Eigen::Index lower = spec_.index(cell_[0] + (ca & 1), cell_[1] + ((ca >> 1) & 1), cell_[2] + ((ca >> 2) & 1));
    const std::uint64_t key = (static_cast<std::uint64_t>(lower) << 3) | static_cast<std::uint64_t>(ca ^ cb);
    const auto [it, inserted] = edge_vertex_.try_emplace(key, static_cast<std::uint32_t>(mesh_.vertices.size()));
    if (inserted) {
      const double va = value_[static_cast<std::size_t>(ca)];
      const double vb = value_[static_cast<std::size_t>(cb)];
      const double t = std::clamp((iso_ - va) / (vb - va), kEdgeClamp, 1.0 - kEdgeClamp);
      const Eigen::Vector3d pa = corner_position(ca);
      const Eigen::Vector3d pb = corner_position(cb);
      mesh_.vertices.push_back(pa + t * (pb - pa));
    }
    return it->second;
  }

  void emit(std::uint32_t a, std::uint32_t b, std::uint32_t c, const Eigen::Vector3d& outward) {
    const Eigen::Vector3d n = (mesh_.vertices[b] - mesh_.vertices[a]).cross(mesh_.vertices[c] - mesh_.vertices[a]);
    if (n.dot(outward) < 0.0) std::swap(b, c);
    mesh_.triangles.push_back({a, b, c});
  }

  void contour_tet(const std::array<int, 4>& tet) {
    std::array<int, 4> in{}, out{};
    int n_in = 0, n_out = 0;
    for (const int c : tet) {
      if (value_[static_cast<std::size_t>(c)] > iso_) {
        in[static_cast<std::size_t>(n_in++)] = c;
      } else {
        out[static_cast<std::size_t>(n_out++)] = c;
      }
    }
    if (n_in == 0 || n_out == 0) return;

    Eigen::Vector3d in_centroid = Eigen::Vector3d::Zero();
    Eigen::Vector3d out_centroid = Eigen::Vector3d::Zero();
    for (int i = 0; i < n_in; ++i) in_centroid += corner_position(in[static_cast<std::size_t>(i)]);
    for (int i = 0; i < n_out; ++i) out_centroid += corner_position(out[static_cast<std::size_t>(i)]);
    const Eigen::Vector3d outward = out_centroid / n_out - in_centroid / n_in;

    if (n_in == 1 || n_out == 1) {
      const int apex = n_in == 1 ? in[0] : out[0];
      const auto& others = n_in == 1 ? out : in;
      emit(edge_vertex(apex, others[0]), edge_vertex(apex, others[1]), edge_vertex(apex, others[2]), outward);
      return;
    }
    // Two in, two out: quad around the tet, split along a fixed diagonal.
    const std::uint32_t p0 = edge_vertex(in[0], out[0]);
    const std::uint32_t p1 = edge_vertex(in[0], out[1]);
    const std::uint32_t p2 = edge_vertex(in[1], out[1]);
    const std::uint32_t p3 = edge_vertex(in[1], out[0]);
    emit(p0, p1, p2, outward);
    emit(p0, p2, p3, outward);
  }

  const GridSpecd& spec_;
  const Field<double>& field_;
  double iso_;
  IsoLayerMesh& mesh_;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex_;
  std::array<int, 3> cell_{};
  std::array<double, 8> value_{};
};

Eigen::Vector3d vertex_gradient(const GridSpecd& spec, const Field<double>& field, int x, int y, int z) {
  const std::array<int, 3> p{x, y, z};
  Eigen::Vector3d g;
  for (int a = 0; a < 3; ++a) {
    std::array<int, 3> lo = p, hi = p;
    lo[static_cast<std::size_t>(a)] = std::max(0, p[static_cast<std::size_t>(a)] - 1);
    hi[static_cast<std::size_t>(a)] = std::min(spec.resolution[a] - 1, p[static_cast<std::size_t>(a)] + 1);
    const int span = hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)];
    const double df = field[spec.index(hi[0], hi[1], hi[2])] - field[spec.index(lo[0], lo[1], lo[2])];
    g[a] = df / (span * spec.spacing[a]);
  }
  return g;
}

Eigen::Vector3d sample_gradient(const GridSpecd& spec, const Field<double>& field, const Eigen::Vector3d& p) {
  std::array<int, 3> cell{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    const double g = (p[a] - spec.origin[a]) / spec.spacing[a];
    const int c = std::clamp(static_cast<int>(std::floor(g)), 0, spec.resolution[a] - 2);
    cell[static_cast<std::size_t>(a)] = c;
    frac[static_cast<std::size_t>(a)] = std::clamp(g - c, 0.0, 1.0);
  }
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double w = (dx ? frac[0] : 1 - frac[0]) * (dy ? frac[1] : 1 - frac[1]) * (dz ? frac[2] : 1 - frac[2]);
    if (w == 0.0) continue;
    acc += w * vertex_gradient(spec, field, cell[0] + dx, cell[1] + dy, cell[2] + dz);
  }
  return acc;
}

}  // namespace

std::vector<Eigen::Vector3d> field_normals(const IsoLayerMesh& mesh, const GridSpecd& spec, const Field<double>& field) {
  std::vector<Eigen::Vector3d> normals(mesh.vertices.size(), Eigen::Vector3d::Zero());
  std::vector<Eigen::Vector3d> face_sum;
  bool need_faces = false;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Eigen::Vector3d g = sample_gradient(spec, field, mesh.vertices[i]);
    const double norm = g.norm();
    if (norm >= 1e-12) {
      normals[i] = -g / norm;
    } else {
      need_faces = true;
    }
  }
  if (need_faces) {
    face_sum.assign(mesh.vertices.size(), Eigen::Vector3d::Zero());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const Eigen::Vector3d n = triangle_normal(mesh, t);
      for (const auto v : mesh.triangles[t]) face_sum[v] += n;
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
      if (normals[i].isZero(0.0)) {
        const double norm = face_sum[i].norm();
        normals[i] = norm > 0.0 ? Eigen::Vector3d(face_sum[i] / norm) : Eigen::Vector3d::UnitZ();
      }
    }
  }
  return normals;
}

std::vector<Eigen::Vector3d> field_normals(const IsoLayerMesh& mesh, const DensityGridd& grid, int cluster) {
  return field_normals(mesh, grid.spec, grid.field(cluster));
}

IsoLayerMesh extract_field_surface(const GridSpecd& spec, const Field<double>& field, double iso) {
  if (!(iso > 0.0)) throw Error("iso value must be positive");
  if (field.size() != spec.vertex_count()) throw Error("field size does not match grid");
  IsoLayerMesh mesh;
  mesh.iso = iso;
  Contourer(spec, field, iso, mesh).run();
  mesh.normals = field_normals(mesh, spec, field);
  return mesh;
}

IsoLayerMesh extract_surface(const DensityGridd& grid, int cluster, double iso) {
  IsoLayerMesh mesh = extract_field_surface(grid.spec, grid.field(cluster), iso);
  mesh.cluster = cluster;
  mesh.base_color = cluster_color(cluster);
  return mesh;
}

std::vector<double> layer_iso_values(double field_max, int layers, double tau_out) {
  if (layers < 1) throw Error("layer count must be at least 1");
  if (!(tau_out > 0.0) || !(tau_out < field_max)) throw Error("outer iso value must lie in (0, field max)");
  const double inner = 0.5 * field_max;
  if (layers > 1 && tau_out >= inner) throw Error("outer iso value must be below half the field max for multiple layers");
  std::vector<double> iso(static_cast<std::size_t>(layers));
  for (int l = 0; l < layers; ++l) {
    iso[static_cast<std::size_t>(l)] = layers == 1 ? tau_out : tau_out + (inner - tau_out) * l / (layers - 1);
  }
  return iso;
}

double layer_opacity(double base_opacity, int layer, int layers) {
  return base_opacity * static_cast<double>(layer + 1) / static_cast<double>(layers);
}

std::vector<IsoLayerMesh> extract_layers(const DensityGridd& grid, int cluster, int layers, double base_opacity,
                                         double tau_out) {
  if (!(base_opacity > 0.0 && base_opacity <= 1.0)) throw Error("base opacity must lie in (0,1]");
  const double field_max = grid.field(cluster).maxCoeff();
  const auto iso = layer_iso_values(field_max, layers, tau_out);
  std::vector<IsoLayerMesh> out;
  out.reserve(iso.size());
  for (int l = 0; l < layers; ++l) {
    IsoLayerMesh mesh = extract_surface(grid, cluster, iso[static_cast<std::size_t>(l)]);
    mesh.layer = l;
    mesh.opacity = layer_opacity(base_opacity, l, layers);
    out.push_back(std::move(mesh));
  }
  return out;
}

}  // namespace subshape
