#pragma once

// Orthonormal 3D bases over D-dimensional attribute space. A basis is stored
// as a 3 x D matrix whose rows (u, v, w) are the projection directions, so a
// projection is a single product X * B^T.

#include "subshape/dataset.hpp"
#include "subshape/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace subshape {

template <typename Scalar>
using BasisRows = Eigen::Matrix<Scalar, 3, Eigen::Dynamic>;

template <typename Scalar>
struct Basis3 {
  BasisRows<Scalar> rows;

  Eigen::Index dims() const { return rows.cols(); }
  auto u() const { return rows.row(0); }
  auto v() const { return rows.row(1); }
  auto w() const { return rows.row(2); }
};

template <typename Scalar>
struct PointCloud3 {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> positions;
  std::vector<int> labels;
  std::vector<int> point_ids;

  Eigen::Index size() const { return positions.rows(); }
};

using Basis3d = Basis3<double>;
using PointCloud3d = PointCloud3<double>;

enum class Slot { U = 0, V = 1, W = 2 };

inline constexpr double kRankTolerance = 1e-9;

/// Largest deviation of B B^T from the identity. Zero for an exact basis.
template <typename Scalar>
Scalar orthonormality_error(const Basis3<Scalar>& basis) {
  const Eigen::Matrix<Scalar, 3, 3> gram = basis.rows * basis.rows.transpose();
  return (gram - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff();
}

template <typename Scalar = double>
Basis3<Scalar> axis_basis(int i, int j, int k, Eigen::Index dims) {
  const std::array<int, 3> idx{i, j, k};
  for (const int a : idx) {
    if (a < 0 || a >= dims) {
      throw Error("dimension index " + std::to_string(a) + " out of range for " +
                  std::to_string(dims) + " dimensions");
    }
  }
  if (i == j || i == k || j == k) throw Error("duplicate dimension index in axis basis");
  Basis3<Scalar> b{BasisRows<Scalar>::Zero(3, dims)};
  for (int r = 0; r < 3; ++r) b.rows(r, idx[static_cast<std::size_t>(r)]) = Scalar(1);
  return b;
}

/// Modified Gram-Schmidt on the rows a, b, c in that order.
template <typename Scalar, typename Derived>
Basis3<Scalar> orthonormalize_rows(const Eigen::MatrixBase<Derived>& stacked) {
  BasisRows<Scalar> q = stacked.template cast<Scalar>();
  for (int r = 0; r < 3; ++r) {
    for (int p = 0; p < r; ++p) q.row(r) -= q.row(r).dot(q.row(p)) * q.row(p);
    const Scalar norm = q.row(r).norm();
    if (!(norm >= Scalar(kRankTolerance))) throw Error("rank-deficient basis vectors");
    q.row(r) /= norm;
  }
  return Basis3<Scalar>{std::move(q)};
}

template <typename Scalar>
Basis3<Scalar> orthonormalize(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c) {
  if (a.size() != b.size() || a.size() != c.size()) throw Error("basis vectors differ in length");
  BasisRows<Scalar> stacked(3, a.size());
  stacked.row(0) = a.transpose();
  stacked.row(1) = b.transpose();
  stacked.row(2) = c.transpose();
  return orthonormalize_rows<Scalar>(stacked);
}

template <typename Scalar>
PointCloud3<Scalar> project(const Dataset& data, const Basis3<Scalar>& basis) {
  if (data.n_dims() != basis.dims()) {
    throw Error("dimension mismatch: dataset has " + std::to_string(data.n_dims()) +
                " dimensions, basis has " + std::to_string(basis.dims()));
  }
  PointCloud3<Scalar> cloud;
  cloud.positions = data.values.cast<Scalar>() * basis.rows.transpose();
  cloud.labels = data.labels;
  cloud.point_ids = data.point_ids;
  return cloud;
}

/// Applies a 3x3 rotation to the stacked rows, then re-orthonormalizes.
template <typename Scalar, typename Derived>
Basis3<Scalar> rotate_basis(const Basis3<Scalar>& basis, const Eigen::MatrixBase<Derived>& rot) {
  static_assert(Derived::RowsAtCompileTime == 3 && Derived::ColsAtCompileTime == 3);
  const Eigen::Matrix<Scalar, 3, 3> r = rot.template cast<Scalar>();
  const Scalar tol = std::max(Scalar(1e-9), Scalar(64) * std::numeric_limits<Scalar>::epsilon());
  const Scalar ortho = (r.transpose() * r - Eigen::Matrix<Scalar, 3, 3>::Identity()).cwiseAbs().maxCoeff();
  if (!(ortho < tol) || !(std::abs(r.determinant() - Scalar(1)) < tol)) {
    throw Error("rotation matrix is not a proper orthogonal matrix");
  }
  return orthonormalize_rows<Scalar>(r * basis.rows);
}

/// Swings one row toward a target direction while the other two stay fixed.
/// t = 0 returns the input basis; t = 1 replaces the row with the component
/// of the target orthogonal to the kept rows.
template <typename Scalar>
Basis3<Scalar> transition_basis(const Basis3<Scalar>& basis, Slot slot,
                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& target, Scalar t) {
  if (target.size() != basis.dims()) throw Error("transition target has wrong dimension");
  if (!(t >= Scalar(0) && t <= Scalar(1))) throw Error("transition parameter must lie in [0,1]");
  if (t == Scalar(0)) return basis;

  const int replaced = static_cast<int>(slot);
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> perp = target.transpose();
  for (int r = 0; r < 3; ++r) {
    if (r != replaced) perp -= perp.dot(basis.rows.row(r)) * basis.rows.row(r);
  }
  const Scalar perp_norm = perp.norm();
  if (!(perp_norm >= Scalar(kRankTolerance))) {
    throw Error("degenerate transition target: lies in the span of the kept rows");
  }
  perp /= perp_norm;

  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> blended = (Scalar(1) - t) * basis.rows.row(replaced) + t * perp;
  const Scalar blended_norm = blended.norm();
  if (!(blended_norm >= Scalar(kRankTolerance))) {
    throw Error("degenerate transition target: opposes the replaced row");
  }
  BasisRows<Scalar> next = basis.rows;
  next.row(replaced) = blended / blended_norm;
  return orthonormalize_rows<Scalar>(next);
}

template <typename Scalar>
Basis3<Scalar> transition_to_dimension(const Basis3<Scalar>& basis, Slot slot, Eigen::Index dim, Scalar t) {
  if (dim < 0 || dim >= basis.dims()) throw Error("transition dimension out of range");
  return transition_basis<Scalar>(basis, slot, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Unit(basis.dims(), dim), t);
}

/// Per-dimension weight sqrt(u_d^2 + v_d^2 + w_d^2), clamped to [0,1].
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dimension_influence(const Basis3<Scalar>& basis) {
  return basis.rows.colwise().norm().transpose().cwiseMin(Scalar(1)).cwiseMax(Scalar(0));
}

}  // namespace subshape
