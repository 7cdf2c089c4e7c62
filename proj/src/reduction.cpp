#include "lsr/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lsr/errors.hpp"

namespace lsr {

ReducedMap::ReducedMap(SplitSystem ss, NewtonSettings newton, std::optional<CertifiedRegion> region,
                       NormKind norm)
    : ss_(std::move(ss)), newton_(newton), region_(std::move(region)), norm_(norm) {}

bool ReducedMap::in_region(const Vector& alpha, const Vector& lambda, const Vector& beta) const {
  if (!region_) return true;
  Vector p(alpha.size() + lambda.size());
  p << alpha, lambda;
  const double dpar = vector_norm(p.cwiseProduct(ss_.par_weights()) - ss_.par0(), norm_);
  const double dperp = vector_norm(beta - ss_.beta0(), norm_);
  for (const auto& e : region_->entries)
    if (e.pass && dpar < e.r_par && dperp < e.r_perp) return true;
  return false;
}

PhiSolution solve_phi(const ReducedMap& rm, const Vector& alpha, const Vector& lambda,
                      const std::optional<Vector>& guess) {
  const SplitSystem& ss = rm.split();
  const NewtonSettings& ns = rm.newton();
  if (alpha.size() != ss.q() || lambda.size() != ss.m())
    fail(ErrorCode::DimensionMismatch, "alpha/lambda lengths do not match the split system");
  if (!all_finite(alpha) || !all_finite(lambda))
    fail(ErrorCode::NonFinite, "alpha/lambda must be finite");

  PhiSolution sol;
  sol.beta = guess ? *guess : ss.beta0();
  if (sol.beta.size() != ss.rank())
    fail(ErrorCode::DimensionMismatch, "initial beta has the wrong length");

  Vector F = ss.evaluate(alpha, sol.beta, lambda);
  if (!all_finite(F)) fail(ErrorCode::NewtonDiverged, "W^T Phi is not finite at the initial guess");
  double r = F.norm();

  auto newton_step = [&](const Vector& beta, const Vector& F_at) {
    const Matrix Jp = ss.blocks(alpha, beta, lambda).d_perp;
    if (!all_finite(Jp) || condition_number(Jp) > kMaxConditionNumber)
      fail(ErrorCode::SingularNewtonSystem, "W^T D_x Phi Vperp is singular along the Newton path");
    return Vector(Jp.partialPivLu().solve(-F_at));
  };

  while (r > ns.tol) {
    if (sol.iterations >= ns.max_iters)
      fail(ErrorCode::NewtonDiverged, "no convergence within " + std::to_string(ns.max_iters) +
                                          " iterations (residual " + std::to_string(r) + ")");
    const Vector step = newton_step(sol.beta, F);
    double t = 1.0;
    int backtracks = 0;
    for (;;) {
      const Vector trial = sol.beta + t * step;
      const Vector Ft = ss.evaluate(alpha, trial, lambda);
      const double rt = all_finite(Ft) ? Ft.norm() : std::numeric_limits<double>::infinity();
      if (rt < r) {
        sol.beta = trial;
        F = Ft;
        r = rt;
        break;
      }
      if (++backtracks > ns.max_backtracks)
        fail(ErrorCode::NewtonDiverged, "step underflow during backtracking");
      t *= 0.5;
    }
    ++sol.iterations;
  }

  // One extra full step drives the residual to rounding level; it is kept only
  // if it does not make things worse.
  if (r > 0.0 && ss.rank() > 0) {
    try {
      const Vector trial = sol.beta + newton_step(sol.beta, F);
      const Vector Ft = ss.evaluate(alpha, trial, lambda);
      if (all_finite(Ft) && Ft.norm() <= r) {
        sol.beta = trial;
        r = Ft.norm();
      }
    } catch (const Error&) {
    }
  }
  sol.residual = r;
  sol.outside_region = !rm.in_region(alpha, lambda, sol.beta);
  return sol;
}

ReducedValue reduced_residual(const ReducedMap& rm, const Vector& alpha, const Vector& lambda,
                              const std::optional<Vector>& guess) {
  const SplitSystem& ss = rm.split();
  ReducedValue out;
  out.phi = solve_phi(rm, alpha, lambda, guess);
  const auto& d = ss.decomposition();
  out.g = d.Wperp.transpose() * ss.system().eval(join_state(d, alpha, out.phi.beta), lambda);
  return out;
}

namespace {

void require_scalar(const SplitSystem& ss) {
  if (ss.q() != 1 || ss.m() != 1)
    fail(ErrorCode::UnsupportedDimensions, "requires a scalar reduced map (q = 1, m = 1); got q = " +
                                               std::to_string(ss.q()) + ", m = " +
                                               std::to_string(ss.m()));
}

}  // namespace

SeriesCoefficients series_coefficients(const ReducedMap& rm) {
  const SplitSystem& ss = rm.split();
  require_scalar(ss);
  const double a0 = ss.alpha0()(0);
  const double l0 = ss.base().lambda0(0);
  const double eps = std::numeric_limits<double>::epsilon();
  const double sa = std::max(1.0, std::abs(a0));
  const double sl = std::max(1.0, std::abs(l0));
  const double h1 = std::pow(eps, 1.0 / 3.0) * sa;
  const double h2 = std::pow(eps, 1.0 / 4.0) * sa;
  const double h3 = std::pow(eps, 1.0 / 5.0) * sa;
  const double k2 = std::pow(eps, 1.0 / 4.0) * sl;

  auto g = [&](double da, double dl) {
    Vector a(1), l(1);
    a(0) = a0 + da;
    l(0) = l0 + dl;
    return reduced_residual(rm, a, l).g(0);
  };

  SeriesCoefficients c;
  c.g_a = (g(h1, 0) - g(-h1, 0)) / (2.0 * h1);
  c.g_aa = (g(h2, 0) - 2.0 * g(0, 0) + g(-h2, 0)) / (h2 * h2);
  c.g_aaa = (g(2 * h3, 0) - 2.0 * g(h3, 0) + 2.0 * g(-h3, 0) - g(-2 * h3, 0)) / (2.0 * h3 * h3 * h3);
  c.g_al = (g(h2, k2) - g(h2, -k2) - g(-h2, k2) + g(-h2, -k2)) / (4.0 * h2 * k2);
  return c;
}

Classification classify(const SeriesCoefficients& c, const ClassificationTolerances& tol) {
  Classification out;
  if (std::abs(c.g_a) > tol.g_a) {
    out.kind = BifurcationKind::Regular;
    out.label = "regular";
    return out;
  }
  const bool cubic = std::abs(c.g_aaa) > tol.g_aaa;
  const bool mixed = std::abs(c.g_al) > tol.g_al;
  if (std::abs(c.g_aa) <= tol.g_aa && cubic && mixed) {
    out.kind = BifurcationKind::Pitchfork;
    out.label = "pitchfork";
    out.subtype = c.g_aaa * c.g_al < 0.0 ? "supercritical" : "subcritical";
    return out;
  }
  if (std::abs(c.g_aa) > tol.g_aa && mixed) {
    out.kind = BifurcationKind::Transcritical;
    out.label = "transcritical";
    return out;
  }
  out.kind = BifurcationKind::Degenerate;
  out.label = "degenerate";
  return out;
}

std::vector<double> lambda_grid(const TraceSettings& s) {
  if (!(s.lambda_step > 0.0) || !(s.lambda_max >= s.lambda_min) || !std::isfinite(s.lambda_min) ||
      !std::isfinite(s.lambda_max))
    fail(ErrorCode::InvalidArgument, "lambda range must be finite with a positive step");
  const auto count = static_cast<long>(std::floor((s.lambda_max - s.lambda_min) / s.lambda_step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(s.lambda_min + static_cast<double>(k) * s.lambda_step);
  return out;
}

std::vector<BranchPoint> roots_at(const ReducedMap& rm, double lambda, const TraceSettings& s,
                                  std::vector<TraceGap>& gaps) {
  const SplitSystem& ss = rm.split();
  require_scalar(ss);
  if (s.alpha_points < 2 || !(s.alpha_max > s.alpha_min))
    fail(ErrorCode::InvalidArgument, "alpha window needs alpha_max > alpha_min and >= 2 points");

  const int N = s.alpha_points;
  Vector lam(1);
  lam(0) = lambda;
  std::vector<double> alphas(static_cast<std::size_t>(N));
  std::vector<double> gs(static_cast<std::size_t>(N), std::numeric_limits<double>::quiet_NaN());
  std::vector<Vector> betas(static_cast<std::size_t>(N));

  std::optional<Vector> warm;
  for (int i = 0; i < N; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    alphas[iu] = s.alpha_min + (s.alpha_max - s.alpha_min) * i / (N - 1);
    Vector a(1);
    a(0) = alphas[iu];
    try {
      const ReducedValue rv = reduced_residual(rm, a, lam, warm);
      gs[iu] = rv.g(0);
      betas[iu] = rv.phi.beta;
      warm = rv.phi.beta;
    } catch (const Error& e) {
      gaps.push_back({lambda, alphas[iu], e.what()});
      warm.reset();
    }
  }

  std::vector<BranchPoint> roots;
  auto accept = [&](double alpha, const std::optional<Vector>& guess, bool degenerate) {
    Vector a(1);
    a(0) = alpha;
    try {
      const ReducedValue rv = reduced_residual(rm, a, lam, guess);
      BranchPoint bp;
      bp.lambda = lam;
      bp.alpha = a;
      bp.beta = rv.phi.beta;
      bp.x = join_state(ss.decomposition(), a, rv.phi.beta);
      bp.residual_full = ss.system().eval(bp.x, lam).norm();
      bp.residual_reduced = rv.g.norm();
      bp.degenerate = degenerate;
      bp.outside_region = rv.phi.outside_region;
      if (bp.residual_full <= s.accept_residual) {
        roots.push_back(std::move(bp));
      } else {
        gaps.push_back({lambda, alpha, "root rejected: full residual " + std::to_string(bp.residual_full)});
      }
    } catch (const Error& e) {
      gaps.push_back({lambda, alpha, e.what()});
    }
  };

  auto sign = [](double v) { return v > 0.0 ? 1 : -1; };
  for (int i = 0; i < N; ++i) {
    const auto iu = static_cast<std::size_t>(i);
    const double gi = gs[iu];
    if (!std::isfinite(gi)) continue;
    if (std::abs(gi) <= s.zero_tol) {
      bool crossing = false;
      if (i > 0 && i + 1 < N && std::isfinite(gs[iu - 1]) && std::isfinite(gs[iu + 1]))
        crossing = sign(gs[iu - 1]) != sign(gs[iu + 1]) || std::abs(gs[iu - 1]) <= s.zero_tol ||
                   std::abs(gs[iu + 1]) <= s.zero_tol;
      else
        crossing = true;
      accept(alphas[iu], betas[iu], !crossing);
      continue;
    }
    if (i + 1 >= N) continue;
    const double gn = gs[iu + 1];
    if (!std::isfinite(gn) || std::abs(gn) <= s.zero_tol || sign(gi) == sign(gn)) continue;

    double lo = alphas[iu], hi = alphas[iu + 1];
    double glo = gi;
    Vector beta_lo = betas[iu];
    bool ok = true;
    while (hi - lo > s.root_tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      Vector a(1);
      a(0) = mid;
      try {
        const ReducedValue rv = reduced_residual(rm, a, lam, beta_lo);
        const double gm = rv.g(0);
        if (gm == 0.0) {
          lo = hi = mid;
          beta_lo = rv.phi.beta;
          break;
        }
        if (sign(gm) == sign(glo)) {
          lo = mid;
          glo = gm;
          beta_lo = rv.phi.beta;
        } else {
          hi = mid;
        }
      } catch (const Error& e) {
        gaps.push_back({lambda, mid, e.what()});
        ok = false;
        break;
      }
    }
    if (ok) accept(0.5 * (lo + hi), beta_lo, false);
  }
  return roots;
}

TraceResult trace_branches(const ReducedMap& rm, const TraceSettings& s) {
  require_scalar(rm.split());
  const double radius = s.match_radius > 0.0 ? s.match_radius : 0.25 * (s.alpha_max - s.alpha_min);

  TraceResult out;
  std::vector<std::size_t> active;  // indices into out.branches, continued last step
  for (double lambda : lambda_grid(s)) {
    std::vector<BranchPoint> roots = roots_at(rm, lambda, s, out.gaps);

    struct Pair {
      double dist;
      std::size_t branch;
      std::size_t root;
    };
    std::vector<Pair> pairs;
    for (std::size_t b : active)
      for (std::size_t r = 0; r < roots.size(); ++r) {
        const double d = std::abs(out.branches[b].points.back().alpha(0) - roots[r].alpha(0));
        if (d <= radius) pairs.push_back({d, b, r});
      }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

    std::vector<bool> root_used(roots.size(), false);
    std::vector<std::size_t> next_active;
    for (const Pair& p : pairs) {
      if (root_used[p.root] ||
          std::find(next_active.begin(), next_active.end(), p.branch) != next_active.end())
        continue;
      root_used[p.root] = true;
      out.branches[p.branch].points.push_back(roots[p.root]);
      next_active.push_back(p.branch);
    }
    for (std::size_t r = 0; r < roots.size(); ++r) {
      if (root_used[r]) continue;
      Branch b;
      b.id = static_cast<int>(out.branches.size());
      b.points.push_back(roots[r]);
      out.branches.push_back(std::move(b));
      next_active.push_back(out.branches.size() - 1);
    }
    active = std::move(next_active);
  }
  return out;
}

}  // namespace lsr
