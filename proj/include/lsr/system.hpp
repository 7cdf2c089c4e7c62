#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lsr/expr.hpp"
#include "lsr/norms.hpp"

namespace lsr {

struct Jacobians {
  Matrix dx;       ///< n x n, D_x Phi
  Matrix dlambda;  ///< n x m, D_lambda Phi
};

/// A parameterised map Phi : R^n x R^m -> R^n, assumed at least C^2, with
/// its partial Jacobians. Evaluators are pure and may be called from many
/// threads at once.
class ParametricSystem {
 public:
  using EvalFn = std::function<Vector(const Vector& x, const Vector& lambda)>;
  using JacobianFn = std::function<Jacobians(const Vector& x, const Vector& lambda)>;

  ParametricSystem(std::string name, int n, int m, EvalFn eval, JacobianFn jacobians);

  /// Jacobians by central differences of `eval`.
  static ParametricSystem with_fd_jacobians(std::string name, int n, int m, EvalFn eval);

  const std::string& name() const noexcept { return name_; }
  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }

  Vector eval(const Vector& x, const Vector& lambda) const;
  Jacobians jacobians(const Vector& x, const Vector& lambda) const;
  Matrix jac_x(const Vector& x, const Vector& lambda) const { return jacobians(x, lambda).dx; }
  Matrix jac_lambda(const Vector& x, const Vector& lambda) const {
    return jacobians(x, lambda).dlambda;
  }

 private:
  void check_dims(const Vector& x, const Vector& lambda) const;

  std::string name_;
  int n_;
  int m_;
  EvalFn eval_;
  JacobianFn jacobians_;
};

/// Central-difference Jacobians with step cbrt(eps) * max(1, |z_i|).
/// NonFinite if any probe is NaN/Inf.
Jacobians fd_jacobians(const ParametricSystem::EvalFn& eval, const Vector& x, const Vector& lambda);

struct ModelParams {
  std::optional<Matrix> A;  ///< linear: n x n
  std::optional<Matrix> B;  ///< linear: n x m
};

/// tanh2, pitchfork_normal_form or linear (Phi = A x + B lambda).
/// UnknownModel for anything else.
ParametricSystem builtin_model(std::string_view name, const ModelParams& params = {});

/// Phi given component-wise in the expression language; Jacobians by dual
/// numbers.
ParametricSystem expr_model(std::string_view source, int n, int m);
ParametricSystem expr_model(std::vector<expr::Ast> components, int n, int m);

inline constexpr double kDefaultEquilibriumTol = 1e-10;

struct EvaluationPoint {
  Vector x0;
  Vector lambda0;
  double residual = 0.0;  ///< ||Phi(x0, lambda0)||_2
};

EvaluationPoint make_point(const ParametricSystem& sys, const Vector& x0, const Vector& lambda0);

/// Returns `pt` unchanged when its residual is within `tol`; otherwise runs
/// Gauss-Newton in x (minimum-norm steps, so a singular Jacobian is fine)
/// with lambda fixed. NotEquilibrium if the residual cannot be brought below
/// `tol`.
EvaluationPoint refine_equilibrium(const ParametricSystem& sys, const EvaluationPoint& pt,
                                   double tol = kDefaultEquilibriumTol, int max_iters = 50);

struct BifurcationCheck {
  bool candidate = false;
  int q = 0;
};

/// Zero singular values of D_x Phi at an equilibrium. Imaginary-axis
/// eigenvalue pairs are not considered.
BifurcationCheck is_bifurcation_candidate(const ParametricSystem& sys, const EvaluationPoint& pt,
                                          double rank_tol, double equilibrium_tol = kDefaultEquilibriumTol);

}  // namespace lsr
