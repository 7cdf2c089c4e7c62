#include "lsr/ls_bounds.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <memory>

#include "lsr/errors.hpp"

namespace lsr {

SplitSystem::SplitSystem(ParametricSystem sys, SubspaceDecomposition decomp, EvaluationPoint base,
                         Vector par_weights)
    : sys_(std::move(sys)),
      decomp_(std::move(decomp)),
      base_(std::move(base)),
      weights_(std::move(par_weights)) {
  const auto split = split_state(decomp_, base_.x0);
  alpha0_ = split.alpha;
  beta0_ = split.beta;
  if (weights_.size() != decomp_.q + sys_.m())
    fail(ErrorCode::DimensionMismatch, "need one weight per (alpha, lambda) coordinate");
  for (Eigen::Index i = 0; i < weights_.size(); ++i)
    if (!(weights_(i) > 0.0) || !std::isfinite(weights_(i)))
      fail(ErrorCode::InvalidArgument, "coordinate weights must be finite and positive");
}

Vector SplitSystem::evaluate(const Vector& alpha, const Vector& beta, const Vector& lambda) const {
  return decomp_.W.transpose() * sys_.eval(join_state(decomp_, alpha, beta), lambda);
}

SplitSystem::Blocks SplitSystem::blocks(const Vector& alpha, const Vector& beta,
                                        const Vector& lambda) const {
  const Jacobians j = sys_.jacobians(join_state(decomp_, alpha, beta), lambda);
  const Matrix WtDx = decomp_.W.transpose() * j.dx;
  Blocks b;
  b.d_par.resize(rank(), q() + m());
  b.d_par.leftCols(q()) = WtDx * decomp_.V;
  b.d_par.rightCols(m()) = decomp_.W.transpose() * j.dlambda;
  b.d_perp = WtDx * decomp_.Vperp;
  return b;
}

Vector SplitSystem::par0() const {
  Vector p(q() + m());
  p << alpha0_, base_.lambda0;
  return p.cwiseProduct(weights_);
}

std::pair<Vector, Vector> SplitSystem::unpack_par(const Vector& u) const {
  const Vector p = u.cwiseQuotient(weights_);
  return {p.head(q()), p.tail(m())};
}

SplitMap SplitSystem::as_split_map() const {
  SplitMap f;
  f.nx = q() + m();
  f.ny = rank();
  auto self = std::make_shared<const SplitSystem>(*this);
  f.eval = [self](const Vector& u, const Vector& beta) {
    const auto [alpha, lambda] = self->unpack_par(u);
    return self->evaluate(alpha, beta, lambda);
  };
  f.jacobians = [self](const Vector& u, const Vector& beta) {
    const auto [alpha, lambda] = self->unpack_par(u);
    Blocks b = self->blocks(alpha, beta, lambda);
    return PartialJacobians{b.d_par * self->par_weights().cwiseInverse().asDiagonal(),
                            std::move(b.d_perp)};
  };
  return f;
}

SplitSystem build_split_system(const ParametricSystem& sys, const EvaluationPoint& base,
                               double rank_tol, double equilibrium_tol,
                               std::vector<double> par_weights) {
  EvaluationPoint pt = make_point(sys, base.x0, base.lambda0);
  pt = refine_equilibrium(sys, pt, equilibrium_tol);
  const Matrix J = sys.jac_x(pt.x0, pt.lambda0);
  SubspaceDecomposition d = compute_decomposition(J, rank_tol);
  Vector w = Vector::Ones(d.q + sys.m());
  if (!par_weights.empty()) {
    if (static_cast<Eigen::Index>(par_weights.size()) != w.size())
      fail(ErrorCode::DimensionMismatch,
           "par_weights needs q + m = " + std::to_string(w.size()) + " entries");
    w = Eigen::Map<const Vector>(par_weights.data(), w.size());
  }
  return SplitSystem(sys, std::move(d), std::move(pt), std::move(w));
}

namespace {

// [0, W^T D_lambda Phi(x0, lambda0)] in weighted coordinates; the kernel block
// is zero because J V = 0.
Matrix par_reference(const SplitSystem& ss) {
  const auto& b = ss.base();
  const Matrix dl = ss.system().jac_lambda(b.x0, b.lambda0);
  Matrix ref = Matrix::Zero(ss.rank(), ss.q() + ss.m());
  ref.rightCols(ss.m()) = ss.decomposition().W.transpose() * dl;
  return ref * ss.par_weights().cwiseInverse().asDiagonal();
}

Matrix perp_reference(const SplitSystem& ss) {
  const auto& d = ss.decomposition();
  return d.W.transpose() * d.J * d.Vperp;
}

}  // namespace

LsMValues compute_ls_M(const SplitSystem& ss, NormKind norm) {
  [[maybe_unused]] const auto& d = ss.decomposition();
  assert((d.W.transpose() * d.J * d.V).norm() <=
         d.rank_tol * std::max(1.0, matrix_norm(d.J, NormKind::Spectral)));

  LsMValues m;
  m.M_par = matrix_norm(par_reference(ss), norm);
  const Matrix reduced = perp_reference(ss);
  if (reduced.rows() == 0) return m;
  if (condition_number(reduced) > kMaxConditionNumber)
    fail(ErrorCode::SingularReducedJacobian, "W^T J Vperp is not invertible");
  m.M_perp = matrix_norm(reduced.inverse(), norm);
  return m;
}

LsLValues estimate_ls_L(const SplitSystem& ss, double r_par, double r_perp,
                        const SupremumEstimator& est, NormKind norm) {
  if (!(r_par >= 0.0) || !(r_perp >= 0.0))
    fail(ErrorCode::InvalidArgument, "radii must be nonnegative");
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!est.L_x_override || !est.L_y_override)
      fail(ErrorCode::InvalidArgument, "analytic estimator needs L_par and L_perp closed forms");
    return {est.L_x_override(r_par), est.L_y_override(r_par, r_perp)};
  }
  const SplitMap f = ss.as_split_map();
  const Vector u0 = ss.par0();
  return {sup_dx_deviation(f, u0, ss.beta0(), par_reference(ss), r_par, est, norm),
          sup_dy_deviation(f, u0, ss.beta0(), perp_reference(ss), r_par, r_perp, est, norm)};
}

LsBoundQuantities make_ls_quantities(const SplitSystem& ss, const SupremumEstimator& est,
                                     NormKind norm) {
  const LsMValues m = compute_ls_M(ss, norm);
  LsBoundQuantities q;
  q.M_par = m.M_par;
  q.M_perp = m.M_perp;
  q.norm = norm;
  q.rigorous = est.rigorous();
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!est.L_x_override || !est.L_y_override)
      fail(ErrorCode::InvalidArgument, "analytic estimator needs L_par and L_perp closed forms");
    q.L_par = est.L_x_override;
    q.L_perp = est.L_y_override;
    return q;
  }
  auto f = std::make_shared<SplitMap>(ss.as_split_map());
  const Vector u0 = ss.par0();
  const Vector beta0 = ss.beta0();
  q.L_par = [f, u0, beta0, ref = par_reference(ss), est, norm](double r) {
    return sup_dx_deviation(*f, u0, beta0, ref, r, est, norm);
  };
  q.L_perp = [f, u0, beta0, ref = perp_reference(ss), est, norm](double r_par, double r_perp) {
    return sup_dy_deviation(*f, u0, beta0, ref, r_par, r_perp, est, norm);
  };
  return q;
}

bool CertifiedRegion::any_pass() const noexcept {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

double CertifiedRegion::max_certified_r_par() const noexcept {
  double best = 0.0;
  for (const auto& e : entries)
    if (e.pass) best = std::max(best, e.r_par);
  return best;
}

CertifiedRegion certify_ls_region(const LsBoundQuantities& quantities,
                                  const std::vector<double>& r_par_grid,
                                  const std::vector<double>& r_perp_grid, OnEntryError on_error) {
  validate_grid(r_par_grid, "r_par");
  validate_grid(r_perp_grid, "r_perp");

  std::map<double, double> l_par_cache;
  std::map<double, std::string> l_par_errors;
  auto evaluate = [&](double r_par, double r_perp) {
    CertifiedEntry e;
    e.r_par = r_par;
    e.r_perp = r_perp;
    try {
      auto it = l_par_cache.find(r_par);
      if (it == l_par_cache.end()) it = l_par_cache.emplace(r_par, quantities.L_par(r_par)).first;
      e.L_par = it->second;
      e.L_perp = quantities.L_perp(r_par, r_perp);
      const Verdict v = check_conditions(quantities.M_par, quantities.M_perp, e.L_par, e.L_perp,
                                         r_par, r_perp);
      e.pass = v.pass;
      e.margin_1 = v.margin_1;
      e.margin_2 = v.margin_2;
    } catch (const Error& err) {
      if (on_error == OnEntryError::Propagate) throw;
      e.error = err.what();
      e.pass = false;
    }
    return e;
  };

  CertifiedRegion region;
  region.entries.reserve(r_par_grid.size() * r_perp_grid.size());
  for (double r_par : r_par_grid)
    for (double r_perp : r_perp_grid) region.entries.push_back(evaluate(r_par, r_perp));

  std::vector<double> sorted_par = r_par_grid;
  std::sort(sorted_par.begin(), sorted_par.end());
  for (std::size_t j = 0; j < r_perp_grid.size(); ++j) {
    FrontierEntry fe;
    fe.r_perp = r_perp_grid[j];
    for (std::size_t i = 0; i < r_par_grid.size(); ++i) {
      const auto& e = region.entries[i * r_perp_grid.size() + j];
      if (e.pass && (!fe.r_par_max || e.r_par > *fe.r_par_max)) fe.r_par_max = e.r_par;
    }
    if (fe.r_par_max) {
      fe.r_par_refined = fe.r_par_max;
      auto next = std::upper_bound(sorted_par.begin(), sorted_par.end(), *fe.r_par_max);
      if (next != sorted_par.end()) {
        const double mid = 0.5 * (*fe.r_par_max + *next);
        if (evaluate(mid, fe.r_perp).pass) fe.r_par_refined = mid;
      }
    }
    region.frontier.push_back(fe);
  }
  return region;
}

CertifiedRegion certify_ls_region(const SplitSystem& ss, const std::vector<double>& r_par_grid,
                                  const std::vector<double>& r_perp_grid,
                                  const SupremumEstimator& est, NormKind norm, OnEntryError on_error) {
  return certify_ls_region(make_ls_quantities(ss, est, norm), r_par_grid, r_perp_grid, on_error);
}

}  // namespace lsr
