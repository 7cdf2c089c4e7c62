#include "lsr/system.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "lsr/errors.hpp"
#include "lsr/subspace.hpp"

namespace lsr {

ParametricSystem::ParametricSystem(std::string name, int n, int m, EvalFn eval, JacobianFn jacobians)
    : name_(std::move(name)), n_(n), m_(m), eval_(std::move(eval)), jacobians_(std::move(jacobians)) {
  if (n < 1 || m < 0) fail(ErrorCode::InvalidArgument, "system needs n >= 1 and m >= 0");
}

ParametricSystem ParametricSystem::with_fd_jacobians(std::string name, int n, int m, EvalFn eval) {
  auto jac = [eval](const Vector& x, const Vector& lambda) { return fd_jacobians(eval, x, lambda); };
  return ParametricSystem(std::move(name), n, m, std::move(eval), std::move(jac));
}

void ParametricSystem::check_dims(const Vector& x, const Vector& lambda) const {
  if (x.size() != n_ || lambda.size() != m_)
    fail(ErrorCode::DimensionMismatch,
         "system '" + name_ + "' expects x in R^" + std::to_string(n_) + " and lambda in R^" +
             std::to_string(m_) + ", got " + std::to_string(x.size()) + " and " +
             std::to_string(lambda.size()));
}

Vector ParametricSystem::eval(const Vector& x, const Vector& lambda) const {
  check_dims(x, lambda);
  return eval_(x, lambda);
}

Jacobians ParametricSystem::jacobians(const Vector& x, const Vector& lambda) const {
  check_dims(x, lambda);
  return jacobians_(x, lambda);
}

Jacobians fd_jacobians(const ParametricSystem::EvalFn& eval, const Vector& x, const Vector& lambda) {
  const double base_step = std::cbrt(std::numeric_limits<double>::epsilon());
  const Eigen::Index n = x.size();
  const Eigen::Index m = lambda.size();

  auto probe = [&](const Vector& xs, const Vector& ls) {
    Vector v = eval(xs, ls);
    if (!all_finite(v)) fail(ErrorCode::NonFinite, "finite-difference probe evaluated to NaN/Inf");
    return v;
  };

  Jacobians out{Matrix(n, n), Matrix(n, m)};
  Vector xp = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = base_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const Vector fp = probe(xp, lambda);
    xp(i) = x(i) - h;
    const Vector fm = probe(xp, lambda);
    xp(i) = x(i);
    out.dx.col(i) = (fp - fm) / (2.0 * h);
  }
  Vector lp = lambda;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double h = base_step * std::max(1.0, std::abs(lambda(j)));
    lp(j) = lambda(j) + h;
    const Vector fp = probe(x, lp);
    lp(j) = lambda(j) - h;
    const Vector fm = probe(x, lp);
    lp(j) = lambda(j);
    out.dlambda.col(j) = (fp - fm) / (2.0 * h);
  }
  return out;
}

namespace {

// Operation order mirrors the dual-number evaluation of the equivalent
// expression "-x1 + tanh(l1*x2); -x2 + tanh(l1*x1)" so both routes agree
// bit for bit.
ParametricSystem make_tanh2() {
  auto eval = [](const Vector& x, const Vector& l) {
    Vector f(2);
    f(0) = -x(0) + std::tanh(l(0) * x(1));
    f(1) = -x(1) + std::tanh(l(0) * x(0));
    return f;
  };
  auto jac = [](const Vector& x, const Vector& l) {
    const double s1 = expr::sech(l(0) * x(0));
    const double s2 = expr::sech(l(0) * x(1));
    const double s1sq = s1 * s1;
    const double s2sq = s2 * s2;
    Jacobians j{Matrix(2, 2), Matrix(2, 1)};
    j.dx << -1.0, s2sq * l(0), s1sq * l(0), -1.0;
    j.dlambda << s2sq * x(1), s1sq * x(0);
    return j;
  };
  return ParametricSystem("tanh2", 2, 1, eval, jac);
}

ParametricSystem make_pitchfork() {
  auto eval = [](const Vector& x, const Vector& l) {
    Vector f(1);
    f(0) = l(0) * x(0) - x(0) * x(0) * x(0);
    return f;
  };
  auto jac = [](const Vector& x, const Vector& l) {
    Jacobians j{Matrix(1, 1), Matrix(1, 1)};
    j.dx(0, 0) = l(0) - 3.0 * x(0) * x(0);
    j.dlambda(0, 0) = x(0);
    return j;
  };
  return ParametricSystem("pitchfork_normal_form", 1, 1, eval, jac);
}

ParametricSystem make_linear(const ModelParams& params) {
  if (!params.A) fail(ErrorCode::InvalidArgument, "linear model requires matrix A");
  const Matrix A = *params.A;
  if (A.rows() == 0 || A.rows() != A.cols())
    fail(ErrorCode::DimensionMismatch, "linear model: A must be square and nonempty");
  const Matrix B = params.B ? *params.B : Matrix::Zero(A.rows(), 1);
  if (B.rows() != A.rows())
    fail(ErrorCode::DimensionMismatch, "linear model: B must have as many rows as A");
  if (!all_finite(A) || !all_finite(B)) fail(ErrorCode::NonFinite, "linear model coefficients");
  auto eval = [A, B](const Vector& x, const Vector& l) -> Vector { return A * x + B * l; };
  auto jac = [A, B](const Vector&, const Vector&) { return Jacobians{A, B}; };
  return ParametricSystem("linear", static_cast<int>(A.rows()), static_cast<int>(B.cols()), eval, jac);
}

}  // namespace

ParametricSystem builtin_model(std::string_view name, const ModelParams& params) {
  if (name == "tanh2") return make_tanh2();
  if (name == "pitchfork_normal_form") return make_pitchfork();
  if (name == "linear") return make_linear(params);
  fail(ErrorCode::UnknownModel, "no built-in model named '" + std::string(name) +
                                    "' (known: tanh2, pitchfork_normal_form, linear)");
}

ParametricSystem expr_model(std::string_view source, int n, int m) {
  return expr_model(expr::parse(source, n, m), n, m);
}

ParametricSystem expr_model(std::vector<expr::Ast> components, int n, int m) {
  if (static_cast<int>(components.size()) != n)
    fail(ErrorCode::ArityError, "expression model needs " + std::to_string(n) + " components");
  for (const auto& c : components)
    if (expr::max_slot(c) >= n + m)
      fail(ErrorCode::UnknownIdentifier, "expression references a variable outside (n, m)");

  auto shared = std::make_shared<const std::vector<expr::Ast>>(std::move(components));
  auto eval = [shared, n, m](const Vector& x, const Vector& l) {
    std::vector<double> values(static_cast<std::size_t>(n + m));
    for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = x(i);
    for (int j = 0; j < m; ++j) values[static_cast<std::size_t>(n + j)] = l(j);
    Vector f(n);
    for (int i = 0; i < n; ++i) f(i) = expr::evaluate((*shared)[static_cast<std::size_t>(i)], values);
    return f;
  };
  auto jac = [shared](const Vector& x, const Vector& l) {
    auto r = expr::eval_dual(*shared, x, l);
    return Jacobians{std::move(r.jac_x), std::move(r.jac_lambda)};
  };
  return ParametricSystem("expr", n, m, eval, jac);
}

EvaluationPoint make_point(const ParametricSystem& sys, const Vector& x0, const Vector& lambda0) {
  const Vector f = sys.eval(x0, lambda0);
  if (!all_finite(f)) fail(ErrorCode::NonFinite, "Phi is not finite at the base point");
  return {x0, lambda0, f.norm()};
}

EvaluationPoint refine_equilibrium(const ParametricSystem& sys, const EvaluationPoint& pt,
                                   double tol, int max_iters) {
  if (pt.residual <= tol) return pt;
  Vector x = pt.x0;
  Vector f = sys.eval(x, pt.lambda0);
  for (int it = 0; it < max_iters && f.norm() > tol; ++it) {
    const Matrix J = sys.jac_x(x, pt.lambda0);
    if (!all_finite(J)) fail(ErrorCode::NonFinite, "Jacobian not finite during refinement");
    const Vector step = J.completeOrthogonalDecomposition().solve(-f);
    double t = 1.0;
    Vector trial = x + step;
    Vector ft = sys.eval(trial, pt.lambda0);
    for (int k = 0; k < 30 && !(ft.norm() < f.norm()); ++k) {
      t *= 0.5;
      trial = x + t * step;
      ft = sys.eval(trial, pt.lambda0);
    }
    if (!(ft.norm() < f.norm())) break;
    x = trial;
    f = ft;
  }
  if (!(f.norm() <= tol))
    fail(ErrorCode::NotEquilibrium, "base point residual " + std::to_string(f.norm()) +
                                        " exceeds equilibrium tolerance after refinement");
  return {x, pt.lambda0, f.norm()};
}

BifurcationCheck is_bifurcation_candidate(const ParametricSystem& sys, const EvaluationPoint& pt,
                                          double rank_tol, double equilibrium_tol) {
  if (!(pt.residual <= equilibrium_tol))
    fail(ErrorCode::NotEquilibrium, "point is not an equilibrium");
  const Matrix J = sys.jac_x(pt.x0, pt.lambda0);
  try {
    const auto d = compute_decomposition(J, rank_tol);
    return {true, d.q};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NonSingularJacobian) return {false, 0};
    throw;
  }
}

}  // namespace lsr
