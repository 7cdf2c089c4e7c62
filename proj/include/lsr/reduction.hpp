#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsr/ls_bounds.hpp"

namespace lsr {

struct NewtonSettings {
  double tol = 1e-12;
  int max_iters = 50;
  int max_backtracks = 30;  ///< step halvings per iteration
};

/// Numerical realisation of the implicit map beta = phi(alpha, lambda) and of
/// the reduced map g(alpha, lambda) on range(J)^perp coordinates.
class ReducedMap {
 public:
  explicit ReducedMap(SplitSystem ss, NewtonSettings newton = {},
                      std::optional<CertifiedRegion> region = std::nullopt,
                      NormKind norm = NormKind::Spectral);

  const SplitSystem& split() const noexcept { return ss_; }
  const NewtonSettings& newton() const noexcept { return newton_; }
  const std::optional<CertifiedRegion>& region() const noexcept { return region_; }

  /// False when a certified region is attached and no certified pair
  /// (r_par, r_perp) contains the point; true when no region is attached.
  bool in_region(const Vector& alpha, const Vector& lambda, const Vector& beta) const;

 private:
  SplitSystem ss_;
  NewtonSettings newton_;
  std::optional<CertifiedRegion> region_;
  NormKind norm_;
};

struct PhiSolution {
  Vector beta;
  int iterations = 0;
  double residual = 0.0;  ///< ||W^T Phi||_2 at the returned beta
  bool outside_region = false;
};

/// Damped Newton on W^T Phi(V alpha + Vperp beta, lambda) = 0 in beta, from
/// `guess` (default beta0). NewtonDiverged on iteration cap or step
/// underflow; SingularNewtonSystem if W^T D_x Phi Vperp is not invertible.
PhiSolution solve_phi(const ReducedMap& rm, const Vector& alpha, const Vector& lambda,
                      const std::optional<Vector>& guess = std::nullopt);

struct ReducedValue {
  Vector g;  ///< Wperp^T Phi(V alpha + Vperp phi, lambda), length q
  PhiSolution phi;
};

ReducedValue reduced_residual(const ReducedMap& rm, const Vector& alpha, const Vector& lambda,
                              const std::optional<Vector>& guess = std::nullopt);

struct SeriesCoefficients {
  double g_a = 0.0;
  double g_aa = 0.0;
  double g_aaa = 0.0;
  double g_al = 0.0;
};

/// Central-difference derivatives of g at (alpha0, lambda0), step
/// eps^(1/(k+2)) for order k. UnsupportedDimensions unless q = m = 1.
SeriesCoefficients series_coefficients(const ReducedMap& rm);

enum class BifurcationKind { Regular, Pitchfork, Transcritical, Degenerate };

struct ClassificationTolerances {
  double g_a = 1e-6;
  double g_aa = 1e-5;
  double g_aaa = 1e-4;
  double g_al = 1e-5;
};

struct Classification {
  BifurcationKind kind = BifurcationKind::Degenerate;
  std::string label;    ///< "pitchfork", "transcritical", "regular", "degenerate"
  std::string subtype;  ///< "supercritical"/"subcritical" for pitchforks
};

Classification classify(const SeriesCoefficients& c, const ClassificationTolerances& tol = {});

struct BranchPoint {
  Vector lambda;
  Vector alpha;
  Vector beta;
  Vector x;
  double residual_full = 0.0;
  double residual_reduced = 0.0;
  bool degenerate = false;  ///< |g| below zero_tol without a sign change
  bool outside_region = false;
};

struct Branch {
  int id = 0;
  std::vector<BranchPoint> points;
};

struct TraceGap {
  double lambda = 0.0;
  double alpha = 0.0;
  std::string reason;
};

struct TraceSettings {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double lambda_step = 0.01;
  double alpha_min = -1.0;
  double alpha_max = 1.0;
  int alpha_points = 401;
  double root_tol = 1e-10;
  double zero_tol = 1e-12;
  double accept_residual = 1e-8;
  double match_radius = 0.0;  ///< 0: a quarter of the alpha window
};

struct TraceResult {
  std::vector<Branch> branches;
  std::vector<TraceGap> gaps;
};

/// Roots of g(., lambda) inside the alpha window at one parameter value.
std::vector<BranchPoint> roots_at(const ReducedMap& rm, double lambda, const TraceSettings& s,
                                  std::vector<TraceGap>& gaps);

/// Natural-parameter sweep over lambda; roots are linked into branches by
/// nearest-neighbour matching between consecutive lambda values.
/// UnsupportedDimensions unless q = m = 1.
TraceResult trace_branches(const ReducedMap& rm, const TraceSettings& s);

std::vector<double> lambda_grid(const TraceSettings& s);

}  // namespace lsr
