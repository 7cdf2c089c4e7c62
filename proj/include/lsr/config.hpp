#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lsr/imft_bounds.hpp"
#include "lsr/reduction.hpp"
#include "lsr/system.hpp"

namespace lsr {

// Run configuration read from strict-schema JSON: unknown keys anywhere are
// rejected and every error names the offending field path.

struct ModelConfig {
  std::optional<std::string> builtin;
  ModelParams params;
  std::optional<std::string> expr_source;
  int n = 0;
  int m = 0;
};

struct EstimatorConfig {
  SupremumEstimator::Mode mode = SupremumEstimator::Mode::Sampled;
  int samples_per_dim = 33;
  double safety_factor = 1.0;
  std::optional<std::string> L_par;  ///< closed form in r_par
  std::optional<std::string> L_perp; ///< closed form in r_par, r_perp
  std::optional<std::string> L_x;    ///< closed form in r_x
  std::optional<std::string> L_y;    ///< closed form in r_x, r_y
};

struct CertifyTask {
  std::vector<double> r_par;
  std::vector<double> r_perp;
};

struct ImftTask {
  std::vector<std::string> x_vars;
  std::vector<std::string> y_vars;
  std::vector<double> r_x;
  std::vector<double> r_y;
};

struct ReducePoint {
  Vector alpha;
  Vector lambda;
};

struct ReduceTask {
  std::vector<ReducePoint> points;
};

struct OutputConfig {
  std::optional<std::string> path;
  std::optional<std::string> format;
};

struct RunConfig {
  ModelConfig model;
  Vector x0;
  Vector lambda0;
  NormKind norm = NormKind::Spectral;
  double rank_tol = 1e-9;
  double equilibrium_tol = 1e-10;
  std::vector<double> par_weights;
  EstimatorConfig estimator;
  NewtonSettings newton;
  std::optional<CertifyTask> certify;
  std::optional<ImftTask> imft;
  std::optional<ReduceTask> reduce;
  std::optional<TraceSettings> trace;
  OutputConfig output;
  nlohmann::json source;  ///< the config exactly as read, echoed in reports
};

/// ConfigError with a "config.<path>: ..." message on any schema violation.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_text(std::string_view text);

ParametricSystem build_system(const RunConfig& cfg);

/// Estimator for ls-certify (L_par / L_perp overrides) or imft-certify
/// (L_x / L_y overrides).
SupremumEstimator build_ls_estimator(const RunConfig& cfg);
SupremumEstimator build_imft_estimator(const RunConfig& cfg);

/// Inclusive arithmetic grid start + k*step.
std::vector<double> arithmetic_grid(double start, double stop, double step);

}  // namespace lsr
