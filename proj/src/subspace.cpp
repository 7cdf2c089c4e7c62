#include "lsr/subspace.hpp"

#include <cmath>
#include <string>

#include "lsr/errors.hpp"

namespace lsr {

namespace {

void normalise_signs(Matrix& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    auto col = basis.col(c);
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index lead = 0;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) >= peak * (1.0 - 1e-12)) {
        lead = r;
        break;
      }
    }
    if (col(lead) < 0.0) col = -col;
  }
}

}  // namespace

SubspaceDecomposition compute_decomposition(const Matrix& J, double rank_tol) {
  if (J.rows() == 0 || J.rows() != J.cols())
    fail(ErrorCode::DimensionMismatch, "Jacobian must be square and nonempty, got " +
                                           std::to_string(J.rows()) + "x" +
                                           std::to_string(J.cols()));
  if (!all_finite(J)) fail(ErrorCode::NonFinite, "Jacobian contains NaN or Inf");
  if (!(rank_tol >= 0.0)) fail(ErrorCode::InvalidArgument, "rank_tol must be nonnegative");

  const Eigen::Index n = J.rows();
  Eigen::JacobiSVD<Matrix> svd(J, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double smax = sigma(0);

  Eigen::Index q = 0;
  if (smax == 0.0) {
    q = n;
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      if (sigma(i) <= rank_tol * smax) ++q;
  }
  if (q == 0)
    fail(ErrorCode::NonSingularJacobian,
         "Jacobian has full numerical rank (smallest singular value " +
             std::to_string(sigma(n - 1)) + ")");

  const Eigen::Index r = n - q;
  SubspaceDecomposition d;
  d.J = J;
  d.q = static_cast<int>(q);
  d.rank_tol = rank_tol;
  d.singular_values = sigma;
  d.Vperp = svd.matrixV().leftCols(r);
  d.V = svd.matrixV().rightCols(q);
  d.W = svd.matrixU().leftCols(r);
  d.Wperp = svd.matrixU().rightCols(q);
  normalise_signs(d.V);
  normalise_signs(d.Vperp);
  normalise_signs(d.W);
  normalise_signs(d.Wperp);
  return d;
}

Matrix projection_onto_range(const SubspaceDecomposition& d) {
  return d.W * d.W.transpose();
}

StateSplit split_state(const SubspaceDecomposition& d, const Vector& x) {
  if (x.size() != d.n())
    fail(ErrorCode::DimensionMismatch, "state has length " + std::to_string(x.size()) +
                                           ", expected " + std::to_string(d.n()));
  return {d.V.transpose() * x, d.Vperp.transpose() * x};
}

Vector join_state(const SubspaceDecomposition& d, const Vector& alpha, const Vector& beta) {
  if (alpha.size() != d.q || beta.size() != d.rank())
    fail(ErrorCode::DimensionMismatch, "coordinate lengths do not match the decomposition");
  return d.V * alpha + d.Vperp * beta;
}

}  // namespace lsr
