#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lsr/imft_bounds.hpp"
#include "lsr/subspace.hpp"
#include "lsr/system.hpp"

namespace lsr {

/// The range-component equation W^T Phi(V alpha + Vperp beta, lambda) = 0 at
/// a singular equilibrium, viewed as an implicit-function problem in
/// x := (alpha, lambda) and y := beta.
///
/// Radii for (alpha, lambda) are measured in weighted coordinates
/// u = w .* (alpha, lambda); all weights default to 1, which gives the plain
/// Euclidean ball on the concatenated vector.
class SplitSystem {
 public:
  SplitSystem(ParametricSystem sys, SubspaceDecomposition decomp, EvaluationPoint base,
              Vector par_weights);

  const ParametricSystem& system() const noexcept { return sys_; }
  const SubspaceDecomposition& decomposition() const noexcept { return decomp_; }
  const EvaluationPoint& base() const noexcept { return base_; }
  const Vector& alpha0() const noexcept { return alpha0_; }
  const Vector& beta0() const noexcept { return beta0_; }
  const Vector& par_weights() const noexcept { return weights_; }

  int q() const noexcept { return decomp_.q; }
  int m() const noexcept { return sys_.m(); }
  int rank() const noexcept { return decomp_.rank(); }

  /// W^T Phi(V alpha + Vperp beta, lambda), length n - q.
  Vector evaluate(const Vector& alpha, const Vector& beta, const Vector& lambda) const;

  struct Blocks {
    Matrix d_par;   ///< [W^T D_x Phi V, W^T D_lambda Phi], (n-q) x (q+m)
    Matrix d_perp;  ///< W^T D_x Phi Vperp, (n-q) x (n-q)
  };

  Blocks blocks(const Vector& alpha, const Vector& beta, const Vector& lambda) const;

  /// (alpha0, lambda0) in weighted coordinates.
  Vector par0() const;

  /// Splits weighted coordinates u back into (alpha, lambda).
  std::pair<Vector, Vector> unpack_par(const Vector& u) const;

  /// The same problem as a generic SplitMap over (u, beta).
  SplitMap as_split_map() const;

 private:
  ParametricSystem sys_;
  SubspaceDecomposition decomp_;
  EvaluationPoint base_;
  Vector alpha0_;
  Vector beta0_;
  Vector weights_;
};

/// NotEquilibrium when the base residual exceeds `equilibrium_tol` even after
/// Newton refinement; NonSingularJacobian when D_x Phi is regular there.
SplitSystem build_split_system(const ParametricSystem& sys, const EvaluationPoint& base,
                               double rank_tol = kDefaultRankTol,
                               double equilibrium_tol = kDefaultEquilibriumTol,
                               std::vector<double> par_weights = {});

struct LsMValues {
  double M_par = 0.0;   ///< ||[0, W^T D_lambda Phi(x0, lambda0)]||
  double M_perp = 0.0;  ///< ||(W^T J Vperp)^-1||
};

/// SingularReducedJacobian if W^T J Vperp is not invertible.
LsMValues compute_ls_M(const SplitSystem& ss, NormKind norm = NormKind::Spectral);

struct LsLValues {
  double L_par = 0.0;
  double L_perp = 0.0;
};

/// L_par(r_par) = sup ||xi_1|| over the (alpha, lambda) ball with beta = beta0;
/// L_perp(r_par, r_perp) = sup ||xi_2|| over the product of balls.
/// In analytic mode the estimator's L_x/L_y closed forms stand for
/// L_par/L_perp.
LsLValues estimate_ls_L(const SplitSystem& ss, double r_par, double r_perp,
                        const SupremumEstimator& est, NormKind norm = NormKind::Spectral);

struct LsBoundQuantities {
  double M_par = 0.0;
  double M_perp = 0.0;
  std::function<double(double)> L_par;
  std::function<double(double, double)> L_perp;
  NormKind norm = NormKind::Spectral;
  bool rigorous = false;
};

LsBoundQuantities make_ls_quantities(const SplitSystem& ss, const SupremumEstimator& est,
                                     NormKind norm = NormKind::Spectral);

struct CertifiedEntry {
  double r_par = 0.0;
  double r_perp = 0.0;
  double L_par = 0.0;
  double L_perp = 0.0;
  bool pass = false;
  double margin_1 = 0.0;
  double margin_2 = 0.0;
  std::string error;
};

struct FrontierEntry {
  double r_perp = 0.0;
  std::optional<double> r_par_max;      ///< largest certified grid value
  std::optional<double> r_par_refined;  ///< after one bisection toward the next failing value
};

struct CertifiedRegion {
  std::vector<CertifiedEntry> entries;  ///< r_par-major
  std::vector<FrontierEntry> frontier;  ///< one per r_perp, grid order

  bool any_pass() const noexcept;
  /// Largest certified r_par across all r_perp (0 if none).
  double max_certified_r_par() const noexcept;
};

CertifiedRegion certify_ls_region(const LsBoundQuantities& quantities,
                                  const std::vector<double>& r_par_grid,
                                  const std::vector<double>& r_perp_grid,
                                  OnEntryError on_error = OnEntryError::Propagate);

CertifiedRegion certify_ls_region(const SplitSystem& ss, const std::vector<double>& r_par_grid,
                                  const std::vector<double>& r_perp_grid,
                                  const SupremumEstimator& est, NormKind norm = NormKind::Spectral,
                                  OnEntryError on_error = OnEntryError::Propagate);

}  // namespace lsr
