#pragma once

#include "lsr/norms.hpp"

namespace lsr {

inline constexpr double kDefaultRankTol = 1e-9;

/// Orthonormal bases for ker(J), ker(J)^perp, range(J) and range(J)^perp of a
/// square Jacobian that is singular at the base point.
///
/// Columns of every basis are sign-normalised so that the entry of largest
/// magnitude is positive (ties go to the lowest row index); repeated calls on
/// the same J return identical matrices.
struct SubspaceDecomposition {
  Matrix J;
  int q = 0;                ///< kernel dimension
  Matrix V;                 ///< n x q, spans ker(J)
  Matrix Vperp;             ///< n x (n-q), spans ker(J)^perp
  Matrix W;                 ///< n x (n-q), spans range(J)
  Matrix Wperp;             ///< n x q, spans range(J)^perp
  Vector singular_values;   ///< nonincreasing
  double rank_tol = kDefaultRankTol;

  int n() const noexcept { return static_cast<int>(J.rows()); }
  int rank() const noexcept { return n() - q; }
};

/// SVD-based split of R^n relative to J. q counts the singular values with
/// sigma_i <= rank_tol * sigma_max (all of them when J == 0).
///
/// Throws NonSingularJacobian when q == 0, NonFinite for NaN/Inf entries and
/// DimensionMismatch for non-square or empty J.
SubspaceDecomposition compute_decomposition(const Matrix& J, double rank_tol = kDefaultRankTol);

/// Orthogonal projection W W^T onto range(J).
Matrix projection_onto_range(const SubspaceDecomposition& d);

struct StateSplit {
  Vector alpha;  ///< V^T x
  Vector beta;   ///< Vperp^T x
};

StateSplit split_state(const SubspaceDecomposition& d, const Vector& x);

/// V alpha + Vperp beta.
Vector join_state(const SubspaceDecomposition& d, const Vector& alpha, const Vector& beta);

}  // namespace lsr
