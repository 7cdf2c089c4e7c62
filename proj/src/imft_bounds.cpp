#include "lsr/imft_bounds.hpp"

#include <cmath>
#include <limits>
#include <map>

#include "lsr/errors.hpp"
#include "lsr/sampling.hpp"

namespace lsr {

namespace {

void check_radius(double r, const char* name) {
  if (!(r >= 0.0) || !std::isfinite(r))
    fail(ErrorCode::InvalidArgument, std::string(name) + " must be finite and nonnegative");
}

double deviation(const Matrix& jac, const Matrix& reference, NormKind norm) {
  if (!all_finite(jac)) fail(ErrorCode::NonFinite, "sampled Jacobian is NaN/Inf");
  return matrix_norm(jac - reference, norm);
}

}  // namespace

SupremumEstimator SupremumEstimator::sampled(int samples_per_dim, double safety_factor) {
  SupremumEstimator e;
  e.samples_per_dim = samples_per_dim;
  e.safety_factor = safety_factor;
  return e;
}

SupremumEstimator SupremumEstimator::analytic(std::function<double(double)> L_x,
                                              std::function<double(double, double)> L_y) {
  SupremumEstimator e;
  e.mode = Mode::Analytic;
  e.L_x_override = std::move(L_x);
  e.L_y_override = std::move(L_y);
  return e;
}

MValues compute_M(const SplitMap& f, const Vector& x0, const Vector& y0, NormKind norm) {
  const PartialJacobians j = f.jacobians(x0, y0);
  if (!all_finite(j.dx) || !all_finite(j.dy))
    fail(ErrorCode::NonFinite, "Jacobian at the base point is NaN/Inf");
  MValues m;
  m.M_x = matrix_norm(j.dx, norm);
  if (j.dy.rows() == 0) return m;
  if (condition_number(j.dy) > kMaxConditionNumber)
    fail(ErrorCode::SingularDyf, "D_y f at the base point is not invertible");
  m.M_y = matrix_norm(j.dy.inverse(), norm);
  return m;
}

double sup_dx_deviation(const SplitMap& f, const Vector& x0, const Vector& y0,
                        const Matrix& reference, double r_x, const SupremumEstimator& est,
                        NormKind norm) {
  check_radius(r_x, "r_x");
  const auto xs = ball_samples(x0, r_x, est.samples_per_dim, norm);
  const double sup = parallel_max(
      xs.size(), [&](std::size_t i) { return deviation(f.jacobians(xs[i], y0).dx, reference, norm); },
      est.threads);
  return est.safety_factor * sup;
}

double sup_dy_deviation(const SplitMap& f, const Vector& x0, const Vector& y0,
                        const Matrix& reference, double r_x, double r_y,
                        const SupremumEstimator& est, NormKind norm) {
  check_radius(r_x, "r_x");
  check_radius(r_y, "r_y");
  const auto xs = ball_samples(x0, r_x, est.samples_per_dim, norm);
  const auto ys = ball_samples(y0, r_y, est.samples_per_dim, norm);
  const std::size_t ny = ys.size();
  const double sup = parallel_max(
      xs.size() * ny,
      [&](std::size_t k) {
        return deviation(f.jacobians(xs[k / ny], ys[k % ny]).dy, reference, norm);
      },
      est.threads);
  return est.safety_factor * sup;
}

LValues estimate_L(const SplitMap& f, const Vector& x0, const Vector& y0, double r_x, double r_y,
                   const SupremumEstimator& est, NormKind norm) {
  check_radius(r_x, "r_x");
  check_radius(r_y, "r_y");
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!est.L_x_override || !est.L_y_override)
      fail(ErrorCode::InvalidArgument, "analytic estimator needs both L_x and L_y closed forms");
    return {est.L_x_override(r_x), est.L_y_override(r_x, r_y)};
  }
  const PartialJacobians base = f.jacobians(x0, y0);
  return {sup_dx_deviation(f, x0, y0, base.dx, r_x, est, norm),
          sup_dy_deviation(f, x0, y0, base.dy, r_x, r_y, est, norm)};
}

Verdict check_conditions(double M_x, double M_y, double L_x, double L_y, double r_x, double r_y) {
  const double capacity =
      (M_y > 0.0 ? r_y / M_y : std::numeric_limits<double>::infinity()) - M_x * r_x;
  Verdict v;
  v.margin_1 = capacity - (L_x * r_x + L_y * r_y);
  v.margin_2 = 1.0 - M_y * L_y;
  v.pass = v.margin_1 > 0.0 && v.margin_2 > 0.0;
  return v;
}

ImftQuantities make_quantities(const SplitMap& f, const Vector& x0, const Vector& y0,
                               const SupremumEstimator& est, NormKind norm) {
  const MValues m = compute_M(f, x0, y0, norm);
  ImftQuantities q;
  q.M_x = m.M_x;
  q.M_y = m.M_y;
  q.norm = norm;
  q.rigorous = est.rigorous();
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!est.L_x_override || !est.L_y_override)
      fail(ErrorCode::InvalidArgument, "analytic estimator needs both L_x and L_y closed forms");
    q.L_x = est.L_x_override;
    q.L_y = est.L_y_override;
    return q;
  }
  const PartialJacobians base = f.jacobians(x0, y0);
  q.L_x = [f, x0, y0, ref = base.dx, est, norm](double r_x) {
    return sup_dx_deviation(f, x0, y0, ref, r_x, est, norm);
  };
  q.L_y = [f, x0, y0, ref = base.dy, est, norm](double r_x, double r_y) {
    return sup_dy_deviation(f, x0, y0, ref, r_x, r_y, est, norm);
  };
  return q;
}

Verdict check_conditions(const ImftQuantities& q, double r_x, double r_y) {
  if (!(r_x > 0.0) || !(r_y > 0.0))
    fail(ErrorCode::InvalidArgument, "radii must be positive");
  return check_conditions(q.M_x, q.M_y, q.L_x(r_x), q.L_y(r_x, r_y), r_x, r_y);
}

void validate_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) fail(ErrorCode::InvalidArgument, std::string(name) + " grid is empty");
  for (double r : grid)
    if (!(r > 0.0) || !std::isfinite(r))
      fail(ErrorCode::InvalidArgument,
           std::string(name) + " grid entries must be finite and positive");
}

std::vector<ImftRegionEntry> certify_region(const ImftQuantities& q, const std::vector<double>& r_x_grid,
                                            const std::vector<double>& r_y_grid, OnEntryError on_error) {
  validate_grid(r_x_grid, "r_x");
  validate_grid(r_y_grid, "r_y");
  std::vector<ImftRegionEntry> out;
  out.reserve(r_x_grid.size() * r_y_grid.size());
  for (double r_x : r_x_grid) {
    double L_x = 0.0;
    std::string lx_error;
    try {
      L_x = q.L_x(r_x);
    } catch (const Error& e) {
      if (on_error == OnEntryError::Propagate) throw;
      lx_error = e.what();
    }
    for (double r_y : r_y_grid) {
      ImftRegionEntry e;
      e.r_x = r_x;
      e.r_y = r_y;
      e.L_x = L_x;
      e.error = lx_error;
      if (e.error.empty()) {
        try {
          e.L_y = q.L_y(r_x, r_y);
          e.verdict = check_conditions(q.M_x, q.M_y, e.L_x, e.L_y, r_x, r_y);
        } catch (const Error& err) {
          if (on_error == OnEntryError::Propagate) throw;
          e.error = err.what();
        }
      }
      if (!e.error.empty()) e.verdict = Verdict{};
      out.push_back(std::move(e));
    }
  }
  return out;
}

WitnessResult newton_witness(const SplitMap& f, const Vector& x, const Vector& y_start,
                             const Vector& target, double tol, int max_iters) {
  WitnessResult r{false, y_start, 0};
  Vector res = f.eval(x, r.y) - target;
  while (r.iterations < max_iters) {
    if (!all_finite(res)) return r;
    if (res.norm() <= tol) {
      r.converged = true;
      return r;
    }
    const Matrix dy = f.jacobians(x, r.y).dy;
    if (!all_finite(dy) || condition_number(dy) > kMaxConditionNumber) return r;
    r.y -= dy.partialPivLu().solve(res);
    res = f.eval(x, r.y) - target;
    ++r.iterations;
  }
  r.converged = all_finite(res) && res.norm() <= tol;
  return r;
}

}  // namespace lsr
