#include "lsr/lsr.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "lsr/config.hpp"
#include "lsr/errors.hpp"
#include "lsr/ls_bounds.hpp"
#include "lsr/reduction.hpp"
#include "lsr/run.hpp"
#include "lsr/system.hpp"
#include "lsr/version.hpp"

struct lsr_system {
  lsr::ParametricSystem sys;
};

struct lsr_decomposition {
  lsr::SubspaceDecomposition d;
};

struct lsr_split_system {
  lsr::SplitSystem ss;
  lsr_decomposition view;
};

struct lsr_reduced_map {
  lsr::ReducedMap rm;
};

struct lsr_run_result {
  lsr::RunOutcome outcome;
};

namespace {

thread_local std::string last_error;

template <class Fn>
lsr_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return LSR_OK;
  } catch (const lsr::Error& e) {
    last_error = e.what();
    return static_cast<lsr_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return LSR_INTERNAL_ERROR;
}

void require(const void* p, const char* what) {
  if (!p) lsr::fail(lsr::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

lsr::Vector read_vector(const double* p, int len) {
  if (len == 0) return lsr::Vector(0);
  require(p, "vector argument");
  return Eigen::Map<const lsr::Vector>(p, len);
}

lsr::Matrix read_row_major(const double* p, int rows, int cols) {
  require(p, "matrix argument");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(p, rows, cols);
}

void write_row_major(const lsr::Matrix& a, double* out) {
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, a.rows(), a.cols()) = a;
}

void write_vector(const lsr::Vector& v, double* out) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = v(i);
}

lsr::NormKind to_norm(lsr_norm n) {
  switch (n) {
    case LSR_NORM_SPECTRAL: return lsr::NormKind::Spectral;
    case LSR_NORM_ONE: return lsr::NormKind::One;
    case LSR_NORM_INFINITY: return lsr::NormKind::Infinity;
  }
  lsr::fail(lsr::ErrorCode::InvalidArgument, "unknown norm");
}

lsr::SupremumEstimator to_estimator(const lsr_estimator_options* opts) {
  lsr_estimator_options o;
  lsr_estimator_options_init(&o);
  if (opts) o = *opts;
  lsr::RunConfig cfg;
  cfg.estimator.mode = o.analytic ? lsr::SupremumEstimator::Mode::Analytic : lsr::SupremumEstimator::Mode::Sampled;
  if (o.samples_per_dim < 1) lsr::fail(lsr::ErrorCode::InvalidArgument, "samples_per_dim must be >= 1");
  cfg.estimator.samples_per_dim = o.samples_per_dim;
  cfg.estimator.safety_factor = o.safety_factor;
  if (o.L_par_expr) cfg.estimator.L_par = o.L_par_expr;
  if (o.L_perp_expr) cfg.estimator.L_perp = o.L_perp_expr;
  lsr::SupremumEstimator est = lsr::build_ls_estimator(cfg);
  est.threads = o.threads;
  return est;
}

}  // namespace

extern "C" {

const char* lsr_version(void) { return lsr::kVersion; }

const char* lsr_status_name(lsr_status status) {
  if (status == LSR_OK) return "Ok";
  if (status == LSR_INTERNAL_ERROR) return "InternalError";
  if (status >= LSR_NON_SINGULAR_JACOBIAN && status <= LSR_IO_ERROR)
    return lsr::error_name(static_cast<lsr::ErrorCode>(static_cast<int>(status)));
  return "Unknown";
}

const char* lsr_last_error_message(void) { return last_error.c_str(); }

lsr_status lsr_system_builtin(const char* name, const double* A, const double* B, int n, int m,
                              lsr_system** out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    lsr::ModelParams params;
    if (A) params.A = read_row_major(A, n, n);
    if (B) params.B = read_row_major(B, n, m);
    *out = new lsr_system{lsr::builtin_model(name, params)};
  });
}

lsr_status lsr_system_from_expr(const char* source, int n, int m, lsr_system** out) {
  return guarded([&] {
    require(source, "source");
    require(out, "out");
    *out = new lsr_system{lsr::expr_model(source, n, m)};
  });
}

void lsr_system_free(lsr_system* sys) { delete sys; }
int lsr_system_n(const lsr_system* sys) { return sys ? sys->sys.n() : 0; }
int lsr_system_m(const lsr_system* sys) { return sys ? sys->sys.m() : 0; }

lsr_status lsr_system_eval(const lsr_system* sys, const double* x, const double* lambda, double* out_n) {
  return guarded([&] {
    require(sys, "sys");
    require(out_n, "out");
    write_vector(sys->sys.eval(read_vector(x, sys->sys.n()), read_vector(lambda, sys->sys.m())), out_n);
  });
}

lsr_status lsr_system_jacobians(const lsr_system* sys, const double* x, const double* lambda, double* dx,
                                double* dlambda) {
  return guarded([&] {
    require(sys, "sys");
    const lsr::Jacobians j = sys->sys.jacobians(read_vector(x, sys->sys.n()), read_vector(lambda, sys->sys.m()));
    if (dx) write_row_major(j.dx, dx);
    if (dlambda) write_row_major(j.dlambda, dlambda);
  });
}

lsr_status lsr_decompose(const double* J, int n, double rank_tol, lsr_decomposition** out) {
  return guarded([&] {
    require(out, "out");
    if (n < 1) lsr::fail(lsr::ErrorCode::DimensionMismatch, "n must be positive");
    const double tol = rank_tol > 0 ? rank_tol : lsr::kDefaultRankTol;
    *out = new lsr_decomposition{lsr::compute_decomposition(read_row_major(J, n, n), tol)};
  });
}

void lsr_decomposition_free(lsr_decomposition* d) { delete d; }
int lsr_decomposition_n(const lsr_decomposition* d) { return d ? d->d.n() : 0; }
int lsr_decomposition_q(const lsr_decomposition* d) { return d ? d->d.q : 0; }

lsr_status lsr_decomposition_basis(const lsr_decomposition* d, char which, double* out) {
  return guarded([&] {
    require(d, "decomposition");
    require(out, "out");
    switch (which) {
      case 'V': write_row_major(d->d.V, out); break;
      case 'P': write_row_major(d->d.Vperp, out); break;
      case 'W': write_row_major(d->d.W, out); break;
      case 'R': write_row_major(d->d.Wperp, out); break;
      default: lsr::fail(lsr::ErrorCode::InvalidArgument, "basis selector must be V, P, W or R");
    }
  });
}

lsr_status lsr_decomposition_singular_values(const lsr_decomposition* d, double* out_n) {
  return guarded([&] {
    require(d, "decomposition");
    require(out_n, "out");
    write_vector(d->d.singular_values, out_n);
  });
}

lsr_status lsr_split_system_create(const lsr_system* sys, const double* x0, const double* lambda0,
                                   double rank_tol, double equilibrium_tol, const double* weights,
                                   lsr_split_system** out) {
  return guarded([&] {
    require(sys, "sys");
    require(out, "out");
    const lsr::EvaluationPoint pt =
        lsr::make_point(sys->sys, read_vector(x0, sys->sys.n()), read_vector(lambda0, sys->sys.m()));
    const double rtol = rank_tol > 0 ? rank_tol : lsr::kDefaultRankTol;
    const double etol = equilibrium_tol > 0 ? equilibrium_tol : lsr::kDefaultEquilibriumTol;
    lsr::SplitSystem ss = lsr::build_split_system(sys->sys, pt, rtol, etol);
    if (weights) {
      const lsr::Vector w = read_vector(weights, ss.q() + ss.m());
      ss = lsr::SplitSystem(ss.system(), ss.decomposition(), ss.base(), w);
    }
    lsr_decomposition view{ss.decomposition()};
    *out = new lsr_split_system{std::move(ss), std::move(view)};
  });
}

void lsr_split_system_free(lsr_split_system* ss) { delete ss; }
int lsr_split_system_q(const lsr_split_system* ss) { return ss ? ss->ss.q() : 0; }
int lsr_split_system_rank(const lsr_split_system* ss) { return ss ? ss->ss.rank() : 0; }

const lsr_decomposition* lsr_split_system_decomposition(const lsr_split_system* ss) {
  return ss ? &ss->view : nullptr;
}

void lsr_estimator_options_init(lsr_estimator_options* opts) {
  if (!opts) return;
  opts->analytic = 0;
  opts->samples_per_dim = 33;
  opts->safety_factor = 1.0;
  opts->L_par_expr = nullptr;
  opts->L_perp_expr = nullptr;
  opts->threads = 0;
}

lsr_status lsr_ls_compute_M(const lsr_split_system* ss, lsr_norm norm, double* M_par, double* M_perp) {
  return guarded([&] {
    require(ss, "split system");
    const lsr::LsMValues m = lsr::compute_ls_M(ss->ss, to_norm(norm));
    if (M_par) *M_par = m.M_par;
    if (M_perp) *M_perp = m.M_perp;
  });
}

lsr_status lsr_ls_estimate_L(const lsr_split_system* ss, double r_par, double r_perp,
                             const lsr_estimator_options* opts, lsr_norm norm, double* L_par, double* L_perp) {
  return guarded([&] {
    require(ss, "split system");
    const lsr::LsLValues l = lsr::estimate_ls_L(ss->ss, r_par, r_perp, to_estimator(opts), to_norm(norm));
    if (L_par) *L_par = l.L_par;
    if (L_perp) *L_perp = l.L_perp;
  });
}

lsr_status lsr_check_conditions(double M_free, double M_solved, double L_free, double L_solved, double r_free,
                                double r_solved, int* pass, double* margin_1, double* margin_2) {
  return guarded([&] {
    require(pass, "pass");
    const lsr::Verdict v = lsr::check_conditions(M_free, M_solved, L_free, L_solved, r_free, r_solved);
    *pass = v.pass ? 1 : 0;
    if (margin_1) *margin_1 = v.margin_1;
    if (margin_2) *margin_2 = v.margin_2;
  });
}

lsr_status lsr_reduced_map_create(const lsr_split_system* ss, lsr_reduced_map** out) {
  return guarded([&] {
    require(ss, "split system");
    require(out, "out");
    *out = new lsr_reduced_map{lsr::ReducedMap(ss->ss)};
  });
}

void lsr_reduced_map_free(lsr_reduced_map* rm) { delete rm; }

lsr_status lsr_solve_phi(const lsr_reduced_map* rm, const double* alpha, const double* lambda, double* beta_out,
                         int* iterations) {
  return guarded([&] {
    require(rm, "reduced map");
    const auto& ss = rm->rm.split();
    const lsr::PhiSolution s = lsr::solve_phi(rm->rm, read_vector(alpha, ss.q()), read_vector(lambda, ss.m()));
    if (beta_out) write_vector(s.beta, beta_out);
    if (iterations) *iterations = s.iterations;
  });
}

lsr_status lsr_reduced_residual(const lsr_reduced_map* rm, const double* alpha, const double* lambda,
                                double* g_out) {
  return guarded([&] {
    require(rm, "reduced map");
    require(g_out, "g_out");
    const auto& ss = rm->rm.split();
    write_vector(lsr::reduced_residual(rm->rm, read_vector(alpha, ss.q()), read_vector(lambda, ss.m())).g, g_out);
  });
}

lsr_status lsr_series_coefficients(const lsr_reduced_map* rm, double* out4) {
  return guarded([&] {
    require(rm, "reduced map");
    require(out4, "out4");
    const lsr::SeriesCoefficients c = lsr::series_coefficients(rm->rm);
    out4[0] = c.g_a;
    out4[1] = c.g_aa;
    out4[2] = c.g_aaa;
    out4[3] = c.g_al;
  });
}

lsr_status lsr_run(const char* command, const char* config_json, const char* format, unsigned flags,
                   lsr_run_result** out) {
  return guarded([&] {
    require(command, "command");
    require(config_json, "config");
    require(out, "out");
    const auto cmd = lsr::parse_command(command);
    if (!cmd) lsr::fail(lsr::ErrorCode::InvalidArgument, std::string("unknown command '") + command + "'");
    lsr::RunOptions opts;
    opts.timestamp = (flags & LSR_RUN_NO_TIMESTAMP) == 0;
    if (format) {
      const std::string f = format;
      if (f == "json") {
        opts.format = lsr::Format::Json;
      } else if (f == "csv") {
        opts.format = lsr::Format::Csv;
      } else {
        lsr::fail(lsr::ErrorCode::InvalidArgument, "format must be 'json' or 'csv'");
      }
    }
    const lsr::RunConfig cfg = lsr::parse_config_text(config_json);
    *out = new lsr_run_result{lsr::run(*cmd, cfg, opts)};
  });
}

void lsr_run_result_free(lsr_run_result* r) { delete r; }
const char* lsr_run_result_text(const lsr_run_result* r) { return r ? r->outcome.text.c_str() : ""; }
int lsr_run_result_exit_code(const lsr_run_result* r) { return r ? r->outcome.exit_code : 1; }

const char* lsr_run_result_output_path(const lsr_run_result* r) {
  return r && r->outcome.output_path ? r->outcome.output_path->c_str() : nullptr;
}

const char* lsr_run_result_format(const lsr_run_result* r) {
  return r && r->outcome.format == lsr::Format::Csv ? "csv" : "json";
}

}  // extern "C"
