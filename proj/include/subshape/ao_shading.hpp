#pragma once

#include "subshape/mesh.hpp"
#include "subshape/voxelizer.hpp"

#include <optional>
#include <vector>

namespace subshape {

struct AOParams {
  int n_directions = 64;
  std::optional<double> max_distance;  // default: 0.25 x longest grid extent
  std::optional<double> step;          // default: 0.5 x voxel spacing
  double ambient_floor = 0.2;          // k_a
};

struct ResolvedAO {
  int n_directions;
  double max_distance;
  double step;
  double ambient_floor;
};

ResolvedAO resolve(const AOParams& params, const GridSpecd& spec);

/// Fixed cosine-weighted hemisphere directions around +z from a Hammersley
/// point set. Identical for every call with the same count.
std::vector<Eigen::Vector3d> hemisphere_directions(int count);

/// Coefficient-wise maximum over every cluster's field. A probe that exceeds
/// a mesh's iso value in this field hits some cluster's shape.
Field<double> union_field(const DensityGridd& grid);

/// Per-vertex occluded fraction of hemisphere probes. Each probe starts one
/// voxel above the vertex along its normal and marches `step` at a time up
/// to `max_distance`; it counts as occluded once the occluder field exceeds
/// the mesh iso value.
std::vector<double> bake_occlusion_field(const IsoLayerMesh& mesh, const GridSpecd& spec,
                                         const Field<double>& occluders, const AOParams& params);

/// Occlusion against the union of all clusters in the grid.
std::vector<double> bake_occlusion(const IsoLayerMesh& mesh, const DensityGridd& grid, int cluster,
                                   const AOParams& params);

/// base * (k_a + (1 - k_a) * (1 - occlusion)), clamped to [0,1].
std::vector<Eigen::Vector3d> shade_vertices(const IsoLayerMesh& mesh, const AOParams& params);

}  // namespace subshape
