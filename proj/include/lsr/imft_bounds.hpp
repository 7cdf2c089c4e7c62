#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lsr/norms.hpp"

namespace lsr {

/// Partial Jacobians of f(x, y) with f : R^nx x R^ny -> R^ny.
struct PartialJacobians {
  Matrix dx;  ///< ny x nx
  Matrix dy;  ///< ny x ny
};

/// A map whose variables are split into "free" x and "solved-for" y.
struct SplitMap {
  int nx = 0;
  int ny = 0;
  std::function<Vector(const Vector& x, const Vector& y)> eval;
  std::function<PartialJacobians(const Vector& x, const Vector& y)> jacobians;
};

/// D_y f beyond this condition number is treated as not invertible.
inline constexpr double kMaxConditionNumber = 1e14;

struct MValues {
  double M_x = 0.0;  ///< ||D_x f(x0, y0)||
  double M_y = 0.0;  ///< ||(D_y f(x0, y0))^-1||
};

/// SingularDyf when D_y f(x0, y0) is not invertible.
MValues compute_M(const SplitMap& f, const Vector& x0, const Vector& y0, NormKind norm);

/// How the suprema L_x and L_y are obtained.
///
/// Sampled mode takes a max over a finite deterministic point set, so its
/// result is a lower estimate of the true supremum; `safety_factor` inflates
/// it. Analytic mode evaluates user-supplied closed forms and is the only
/// rigorous mode.
struct SupremumEstimator {
  enum class Mode { Sampled, Analytic };

  Mode mode = Mode::Sampled;
  int samples_per_dim = 33;
  double safety_factor = 1.0;
  std::function<double(double r_x)> L_x_override;
  std::function<double(double r_x, double r_y)> L_y_override;
  unsigned threads = 0;  ///< 0: sampling_threads()

  bool rigorous() const noexcept { return mode == Mode::Analytic; }

  static SupremumEstimator sampled(int samples_per_dim = 33, double safety_factor = 1.0);
  static SupremumEstimator analytic(std::function<double(double)> L_x,
                                    std::function<double(double, double)> L_y);
};

struct LValues {
  double L_x = 0.0;
  double L_y = 0.0;
};

/// Sampled or closed-form L_x(r_x) and L_y(r_x, r_y). NonFinite if a sampled
/// Jacobian is NaN/Inf.
LValues estimate_L(const SplitMap& f, const Vector& x0, const Vector& y0, double r_x, double r_y,
                   const SupremumEstimator& est, NormKind norm);

/// max over x in B(x0, r_x) of ||D_x f(x, y0) - reference||.
double sup_dx_deviation(const SplitMap& f, const Vector& x0, const Vector& y0,
                        const Matrix& reference, double r_x, const SupremumEstimator& est,
                        NormKind norm);

/// max over (x, y) in B(x0, r_x) x B(y0, r_y) of ||D_y f(x, y) - reference||.
double sup_dy_deviation(const SplitMap& f, const Vector& x0, const Vector& y0,
                        const Matrix& reference, double r_x, double r_y,
                        const SupremumEstimator& est, NormKind norm);

struct Verdict {
  bool pass = false;
  double margin_1 = 0.0;  ///< (r_y/M_y - M_x r_x) - (L_x r_x + L_y r_y)
  double margin_2 = 0.0;  ///< 1 - M_y L_y
};

/// Both strict inequalities; a margin <= 0 fails.
Verdict check_conditions(double M_x, double M_y, double L_x, double L_y, double r_x, double r_y);

struct ImftQuantities {
  double M_x = 0.0;
  double M_y = 0.0;
  std::function<double(double)> L_x;
  std::function<double(double, double)> L_y;
  NormKind norm = NormKind::Spectral;
  bool rigorous = false;
};

ImftQuantities make_quantities(const SplitMap& f, const Vector& x0, const Vector& y0,
                               const SupremumEstimator& est, NormKind norm);

/// InvalidArgument unless r_x, r_y > 0.
Verdict check_conditions(const ImftQuantities& q, double r_x, double r_y);

enum class OnEntryError { Propagate, Record };

struct ImftRegionEntry {
  double r_x = 0.0;
  double r_y = 0.0;
  double L_x = 0.0;
  double L_y = 0.0;
  Verdict verdict;
  std::string error;  ///< set when the entry failed numerically (Record mode)
};

/// check_conditions over the grid product, r_x-major. Grids must be nonempty
/// with finite positive entries.
std::vector<ImftRegionEntry> certify_region(const ImftQuantities& q, const std::vector<double>& r_x_grid,
                                            const std::vector<double>& r_y_grid,
                                            OnEntryError on_error = OnEntryError::Propagate);

struct WitnessResult {
  bool converged = false;
  Vector y;
  int iterations = 0;
};

/// Newton in y for f(x, y) = target starting from y_start.
WitnessResult newton_witness(const SplitMap& f, const Vector& x, const Vector& y_start,
                             const Vector& target, double tol = 1e-12, int max_iters = 50);

void validate_grid(const std::vector<double>& grid, const char* name);

}  // namespace lsr
