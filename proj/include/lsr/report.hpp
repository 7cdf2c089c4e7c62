#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lsr/norms.hpp"
#include "lsr/reduction.hpp"
#include "lsr/subspace.hpp"

namespace lsr {

enum class Command { LsCertify, ImftCertify, Reduce, Trace };

const char* command_name(Command c) noexcept;
std::optional<Command> parse_command(std::string_view name) noexcept;

enum class Format { Json, Csv };

struct ReportMeta {
  std::string tool;
  std::string version;
  Command command = Command::LsCertify;
  NormKind norm = NormKind::Spectral;
  std::string estimator_mode;
  bool rigorous = false;
  int samples_per_dim = 0;
  double safety_factor = 1.0;
  std::vector<std::string> notes;
  nlohmann::json config;
  std::optional<std::string> timestamp;

  bool operator==(const ReportMeta&) const = default;
};

struct DecompositionSummary {
  int n = 0;
  int q = 0;
  double rank_tol = 0.0;
  Vector x0;
  Vector lambda0;
  double base_residual = 0.0;
  Vector singular_values;
  Matrix V;
  Matrix Vperp;
  Matrix W;
  Matrix Wperp;

  bool operator==(const DecompositionSummary& other) const;
};

DecompositionSummary summarize(const SubspaceDecomposition& d, const Vector& x0,
                               const Vector& lambda0, double base_residual);

// Certification reports share one layout for both commands: the "free"
// radius is r_par / r_x and the "solved" radius is r_perp / r_y.

struct FreeLRow {
  double r_free = 0.0;
  double L = 0.0;
  bool operator==(const FreeLRow&) const = default;
};

struct SolvedLRow {
  double r_free = 0.0;
  double r_solved = 0.0;
  double L = 0.0;
  bool operator==(const SolvedLRow&) const = default;
};

struct RegionRow {
  double r_free = 0.0;
  double r_solved = 0.0;
  double L_free = 0.0;
  double L_solved = 0.0;
  double margin_1 = 0.0;
  double margin_2 = 0.0;
  bool pass = false;
  std::string error;
  bool operator==(const RegionRow&) const = default;
};

struct FrontierRow {
  double r_solved = 0.0;
  std::optional<double> r_free_max;
  std::optional<double> r_free_refined;
  bool operator==(const FrontierRow&) const = default;
};

struct CertificationReport {
  ReportMeta meta;
  std::optional<DecompositionSummary> decomposition;  ///< absent for imft-certify
  double M_free = 0.0;
  double M_solved = 0.0;
  std::vector<FreeLRow> L_free;
  std::vector<SolvedLRow> L_solved;
  std::vector<RegionRow> region;
  std::vector<FrontierRow> frontier;

  bool any_pass() const noexcept;
  bool operator==(const CertificationReport&) const = default;
};

nlohmann::json to_json(const CertificationReport& r);
/// Inverse of to_json; ConfigError on malformed input.
CertificationReport certification_from_json(const nlohmann::json& j);

struct ReduceRow {
  Vector alpha;
  Vector lambda;
  Vector g;
  Vector beta;
  int iterations = 0;
  double phi_residual = 0.0;
  std::vector<std::string> warnings;
  std::string status;  ///< "ok" or the error text
};

struct ReduceReport {
  ReportMeta meta;
  DecompositionSummary decomposition;
  int q = 0;
  int m = 0;
  int rank = 0;
  std::vector<ReduceRow> rows;
};

nlohmann::json to_json(const ReduceReport& r);

struct TraceReport {
  ReportMeta meta;
  DecompositionSummary decomposition;
  TraceResult trace;
  std::optional<SeriesCoefficients> series;
  std::optional<Classification> classification;
  std::string series_error;
};

nlohmann::json to_json(const TraceReport& r);

/// Pretty-printed JSON with a trailing newline.
std::string render_json(const nlohmann::json& j);

std::string to_csv(const CertificationReport& r);
std::string to_csv(const ReduceReport& r);
std::string to_csv(const TraceReport& r);

/// 17 significant digits; "inf", "-inf", "nan" for non-finite values.
std::string format_double(double v);

/// RFC-4180 field quoting.
std::string csv_field(std::string_view text);

}  // namespace lsr
