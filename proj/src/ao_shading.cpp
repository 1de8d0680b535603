#include "subshape/ao_shading.hpp"

#include "subshape/error.hpp"
#include "subshape/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace subshape {

namespace {

double radical_inverse_base2(std::uint32_t bits) {
  bits = (bits << 16u) | (bits >> 16u);
  bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
  bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
  bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
  bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
  return static_cast<double>(bits) * 2.3283064365386963e-10;
}

// Orthonormal frame with n as third axis (Duff et al. 2017).
void frame_from_normal(const Eigen::Vector3d& n, Eigen::Vector3d& t, Eigen::Vector3d& b) {
  const double sign = std::copysign(1.0, n.z());
  const double a = -1.0 / (sign + n.z());
  const double c = n.x() * n.y() * a;
  t = Eigen::Vector3d(1.0 + sign * n.x() * n.x() * a, sign * c, -sign * n.x());
  b = Eigen::Vector3d(c, sign + n.y() * n.y() * a, -n.y());
}

// Trilinear lookup without the stencil bookkeeping; this is the inner loop.
class Sampler {
public:
  Sampler(const GridSpecd& spec, const Field<double>& field) : spec_(spec), field_(field) {
    inv_spacing_ = spec.spacing.cwiseInverse();
  }

  double operator()(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d g = (p - spec_.origin).cwiseProduct(inv_spacing_);
    int cell[3];
    double f[3];
    for (int a = 0; a < 3; ++a) {
      if (!(g[a] >= 0.0 && g[a] <= spec_.resolution[a] - 1)) return 0.0;
      const int c = std::min(static_cast<int>(g[a]), spec_.resolution[a] - 2);
      cell[a] = c;
      f[a] = g[a] - c;
    }
    const Eigen::Index sx = 1, sy = spec_.resolution.x(), sz = Eigen::Index(spec_.resolution.x()) * spec_.resolution.y();
    const Eigen::Index i0 = cell[0] + sy * cell[1] + sz * cell[2];
    const double* d = field_.data();
    const double c00 = d[i0] + f[0] * (d[i0 + sx] - d[i0]);
    const double c10 = d[i0 + sy] + f[0] * (d[i0 + sy + sx] - d[i0 + sy]);
    const double c01 = d[i0 + sz] + f[0] * (d[i0 + sz + sx] - d[i0 + sz]);
    const double c11 = d[i0 + sz + sy] + f[0] * (d[i0 + sz + sy + sx] - d[i0 + sz + sy]);
    const double c0 = c00 + f[1] * (c10 - c00);
    const double c1 = c01 + f[1] * (c11 - c01);
    return c0 + f[2] * (c1 - c0);
  }

  bool inside(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d g = (p - spec_.origin).cwiseProduct(inv_spacing_);
    for (int a = 0; a < 3; ++a) {
      if (!(g[a] >= 0.0 && g[a] <= spec_.resolution[a] - 1)) return false;
    }
    return true;
  }

private:
  const GridSpecd& spec_;
  const Field<double>& field_;
  Eigen::Vector3d inv_spacing_;
};

}  // namespace

ResolvedAO resolve(const AOParams& params, const GridSpecd& spec) {
  ResolvedAO r{params.n_directions, params.max_distance.value_or(0.25 * spec.extent().maxCoeff()),
               params.step.value_or(0.5 * spec.voxel()), params.ambient_floor};
  if (r.n_directions < 8) throw Error("occlusion needs at least 8 directions");
  if (!(r.max_distance > 0.0)) throw Error("occlusion probe distance must be positive");
  if (!(r.step > 0.0)) throw Error("occlusion step must be positive");
  if (!(r.ambient_floor >= 0.0 && r.ambient_floor < 1.0)) throw Error("ambient floor must lie in [0,1)");
  return r;
}

std::vector<Eigen::Vector3d> hemisphere_directions(int count) {
  std::vector<Eigen::Vector3d> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double u1 = (i + 0.5) / count;
    const double u2 = radical_inverse_base2(static_cast<std::uint32_t>(i));
    const double r = std::sqrt(u1);
    const double phi = 2.0 * std::numbers::pi * u2;
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u1)));
  }
  return dirs;
}

Field<double> union_field(const DensityGridd& grid) {
  if (grid.fields.empty()) return Field<double>::Zero(grid.spec.vertex_count());
  Field<double> out = grid.fields.front();
  for (std::size_t c = 1; c < grid.fields.size(); ++c) out = out.max(grid.fields[c]);
  return out;
}

std::vector<double> bake_occlusion_field(const IsoLayerMesh& mesh, const GridSpecd& spec,
                                         const Field<double>& occluders, const AOParams& params) {
  if (mesh.normals.size() != mesh.vertices.size()) throw Error("mesh has no normals");
  const ResolvedAO ao = resolve(params, spec);
  const auto local = hemisphere_directions(ao.n_directions);
  const Sampler sample(spec, occluders);
  const double offset = spec.voxel();
  const int steps = static_cast<int>(std::floor(ao.max_distance / ao.step + 1e-9));

  std::vector<double> occlusion(mesh.vertices.size(), 0.0);
  parallel_for(mesh.vertices.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const Eigen::Vector3d& n = mesh.normals[v];
      Eigen::Vector3d t, b;
      frame_from_normal(n, t, b);
      const Eigen::Vector3d start = mesh.vertices[v] + offset * n;
      int hits = 0;
      for (const auto& l : local) {
        const Eigen::Vector3d dir = l.x() * t + l.y() * b + l.z() * n;
        for (int k = 0; k <= steps; ++k) {
          const Eigen::Vector3d p = start + (k * ao.step) * dir;
          if (!sample.inside(p)) break;
          if (sample(p) > mesh.iso) {
            ++hits;
            break;
          }
        }
      }
      occlusion[v] = static_cast<double>(hits) / static_cast<double>(local.size());
    }
  }, 64);
  return occlusion;
}

std::vector<double> bake_occlusion(const IsoLayerMesh& mesh, const DensityGridd& grid, int cluster,
                                   const AOParams& params) {
  (void)grid.field(cluster);
  return bake_occlusion_field(mesh, grid.spec, union_field(grid), params);
}

std::vector<Eigen::Vector3d> shade_vertices(const IsoLayerMesh& mesh, const AOParams& params) {
  if (mesh.occlusion.size() != mesh.vertices.size()) throw Error("occlusion not baked");
  const double ka = params.ambient_floor;
  std::vector<Eigen::Vector3d> colors;
  colors.reserve(mesh.vertices.size());
  for (const double occ : mesh.occlusion) {
    const double factor = ka + (1.0 - ka) * (1.0 - occ);
    colors.push_back((mesh.base_color * factor).cwiseMax(0.0).cwiseMin(1.0));
  }
  return colors;
}

}  // namespace subshape
