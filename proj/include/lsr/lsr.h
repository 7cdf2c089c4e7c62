#ifndef LSR_LSR_H
#define LSR_LSR_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(LSR_BUILDING_LIBRARY)
#    define LSR_API __declspec(dllexport)
#  else
#    define LSR_API __declspec(dllimport)
#  endif
#else
#  define LSR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. LSR_OK is zero; every other value names the failure. */
typedef enum lsr_status {
  LSR_OK = 0,
  LSR_NON_SINGULAR_JACOBIAN = 1,
  LSR_NON_FINITE,
  LSR_DIMENSION_MISMATCH,
  LSR_UNKNOWN_MODEL,
  LSR_PARSE_ERROR,
  LSR_ARITY_ERROR,
  LSR_UNKNOWN_IDENTIFIER,
  LSR_DOMAIN_ERROR,
  LSR_SINGULAR_DYF,
  LSR_SINGULAR_REDUCED_JACOBIAN,
  LSR_NOT_EQUILIBRIUM,
  LSR_NEWTON_DIVERGED,
  LSR_SINGULAR_NEWTON_SYSTEM,
  LSR_UNSUPPORTED_DIMENSIONS,
  LSR_INVALID_ARGUMENT,
  LSR_CONFIG_ERROR,
  LSR_IO_ERROR,
  LSR_INTERNAL_ERROR = 100
} lsr_status;

typedef enum lsr_norm { LSR_NORM_SPECTRAL = 0, LSR_NORM_ONE = 1, LSR_NORM_INFINITY = 2 } lsr_norm;

/* Opaque handles. */
typedef struct lsr_system lsr_system;
typedef struct lsr_decomposition lsr_decomposition;
typedef struct lsr_split_system lsr_split_system;
typedef struct lsr_reduced_map lsr_reduced_map;
typedef struct lsr_run_result lsr_run_result;

LSR_API const char* lsr_version(void);
/* "NonSingularJacobian", ...; "Ok" for LSR_OK. */
LSR_API const char* lsr_status_name(lsr_status status);
/* Message of the last failing call on this thread ("" if none). */
LSR_API const char* lsr_last_error_message(void);

/* Systems. Matrices are passed row-major. */
LSR_API lsr_status lsr_system_builtin(const char* name, const double* A, const double* B, int n, int m,
                                      lsr_system** out);
LSR_API lsr_status lsr_system_from_expr(const char* source, int n, int m, lsr_system** out);
LSR_API void lsr_system_free(lsr_system* sys);
LSR_API int lsr_system_n(const lsr_system* sys);
LSR_API int lsr_system_m(const lsr_system* sys);
LSR_API lsr_status lsr_system_eval(const lsr_system* sys, const double* x, const double* lambda,
                                   double* out_n);
/* dx is n*n, dlambda is n*m, both row-major; either may be NULL. */
LSR_API lsr_status lsr_system_jacobians(const lsr_system* sys, const double* x, const double* lambda,
                                        double* dx, double* dlambda);

/* Subspace split of an n x n row-major matrix. rank_tol <= 0 selects the default. */
LSR_API lsr_status lsr_decompose(const double* J, int n, double rank_tol, lsr_decomposition** out);
LSR_API void lsr_decomposition_free(lsr_decomposition* d);
LSR_API int lsr_decomposition_n(const lsr_decomposition* d);
LSR_API int lsr_decomposition_q(const lsr_decomposition* d);
/* which: 'V' (n x q), 'P' for Vperp (n x n-q), 'W' (n x n-q), 'R' for Wperp (n x q). */
LSR_API lsr_status lsr_decomposition_basis(const lsr_decomposition* d, char which, double* out);
LSR_API lsr_status lsr_decomposition_singular_values(const lsr_decomposition* d, double* out_n);

/* Split system at an equilibrium (refined by Newton if needed). weights may be NULL. */
LSR_API lsr_status lsr_split_system_create(const lsr_system* sys, const double* x0, const double* lambda0,
                                           double rank_tol, double equilibrium_tol, const double* weights,
                                           lsr_split_system** out);
LSR_API void lsr_split_system_free(lsr_split_system* ss);
LSR_API int lsr_split_system_q(const lsr_split_system* ss);
LSR_API int lsr_split_system_rank(const lsr_split_system* ss);
/* Borrowed view; valid while ss lives. */
LSR_API const lsr_decomposition* lsr_split_system_decomposition(const lsr_split_system* ss);

typedef struct lsr_estimator_options {
  int analytic;  /* 0: sampled, 1: closed forms below */
  int samples_per_dim;
  double safety_factor;
  const char* L_par_expr;  /* in r_par */
  const char* L_perp_expr; /* in r_par, r_perp */
  unsigned threads;        /* 0: default */
} lsr_estimator_options;

LSR_API void lsr_estimator_options_init(lsr_estimator_options* opts);

LSR_API lsr_status lsr_ls_compute_M(const lsr_split_system* ss, lsr_norm norm, double* M_par, double* M_perp);
LSR_API lsr_status lsr_ls_estimate_L(const lsr_split_system* ss, double r_par, double r_perp,
                                     const lsr_estimator_options* opts, lsr_norm norm, double* L_par,
                                     double* L_perp);
/* Both strict inequalities; pass is 1 or 0. Margins may be NULL. */
LSR_API lsr_status lsr_check_conditions(double M_free, double M_solved, double L_free, double L_solved,
                                        double r_free, double r_solved, int* pass, double* margin_1,
                                        double* margin_2);

/* Reduced map with default Newton settings. */
LSR_API lsr_status lsr_reduced_map_create(const lsr_split_system* ss, lsr_reduced_map** out);
LSR_API void lsr_reduced_map_free(lsr_reduced_map* rm);
/* beta_out has length n - q; iterations may be NULL. */
LSR_API lsr_status lsr_solve_phi(const lsr_reduced_map* rm, const double* alpha, const double* lambda,
                                 double* beta_out, int* iterations);
/* g_out has length q. */
LSR_API lsr_status lsr_reduced_residual(const lsr_reduced_map* rm, const double* alpha, const double* lambda,
                                        double* g_out);
/* out4 receives g_alpha, g_alpha_alpha, g_alpha_alpha_alpha, g_alpha_lambda. */
LSR_API lsr_status lsr_series_coefficients(const lsr_reduced_map* rm, double* out4);

/* Whole pipeline from a JSON config. command: "ls-certify", "imft-certify",
   "reduce" or "trace". format: "json", "csv" or NULL for the default. */
#define LSR_RUN_NO_TIMESTAMP 1u
LSR_API lsr_status lsr_run(const char* command, const char* config_json, const char* format, unsigned flags,
                           lsr_run_result** out);
LSR_API void lsr_run_result_free(lsr_run_result* r);
LSR_API const char* lsr_run_result_text(const lsr_run_result* r);
/* 0 certified / ran, 2 nothing certified. */
LSR_API int lsr_run_result_exit_code(const lsr_run_result* r);
/* output.path from the config, or NULL. */
LSR_API const char* lsr_run_result_output_path(const lsr_run_result* r);
/* "json" or "csv". */
LSR_API const char* lsr_run_result_format(const lsr_run_result* r);

#ifdef __cplusplus
}
#endif

#endif
