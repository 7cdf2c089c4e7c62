#pragma once

#include <optional>
#include <string>

#include "lsr/config.hpp"
#include "lsr/report.hpp"

namespace lsr {

struct RunOptions {
  std::optional<Format> format;  ///< overrides config.output.format
  bool timestamp = true;
};

struct RunOutcome {
  std::string text;  ///< rendered report
  Format format = Format::Json;
  int exit_code = 0;  ///< 0 certified / ran, 2 nothing certified
  std::optional<std::string> output_path;
};

/// Whole pipeline for one command. Throws lsr::Error for configuration and
/// setup failures; per-entry numerical failures are recorded in the report.
RunOutcome run(Command command, const RunConfig& cfg, const RunOptions& opts = {});

CertificationReport run_ls_certify(const RunConfig& cfg, bool timestamp = false);
CertificationReport run_imft_certify(const RunConfig& cfg, bool timestamp = false);
ReduceReport run_reduce(const RunConfig& cfg, bool timestamp = false);
TraceReport run_trace(const RunConfig& cfg, bool timestamp = false);

}  // namespace lsr
