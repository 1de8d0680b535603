#pragma once

#include "subshape/mesh.hpp"
#include "subshape/voxelizer.hpp"

#include <vector>

namespace subshape {

/// Fraction of an edge kept clear of its endpoints when placing a crossing
/// vertex. Keeps every output triangle non-degenerate.
inline constexpr double kEdgeClamp = 1e-3;

/// Contours field > iso with a six-tetrahedra split of every cell. Vertices
/// are welded by cell edge, so a field that is zero on the outer vertex shell
/// yields closed 2-manifold meshes. Normals are filled from the field.
IsoLayerMesh extract_field_surface(const GridSpecd& spec, const Field<double>& field, double iso);

IsoLayerMesh extract_surface(const DensityGridd& grid, int cluster, double iso);

/// Iso values for L nested layers: linear from tau_out (layer 0) to half the
/// field maximum (layer L-1).
std::vector<double> layer_iso_values(double field_max, int layers, double tau_out);

/// alpha * (l + 1) / L, so the innermost layer carries the full opacity.
double layer_opacity(double base_opacity, int layer, int layers);

std::vector<IsoLayerMesh> extract_layers(const DensityGridd& grid, int cluster, int layers, double base_opacity,
                                         double tau_out);

/// Outward unit normals: the negated field gradient (central differences,
/// trilinearly interpolated). Falls back to incident face normals where the
/// gradient vanishes.
std::vector<Eigen::Vector3d> field_normals(const IsoLayerMesh& mesh, const GridSpecd& spec, const Field<double>& field);

std::vector<Eigen::Vector3d> field_normals(const IsoLayerMesh& mesh, const DensityGridd& grid, int cluster);

}  // namespace subshape
