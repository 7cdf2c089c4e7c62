#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lsr/lsr.h"

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string format;
  bool no_timestamp = false;
};

int fail_with(const std::string& message) {
  std::cerr << "lsred: error: " << message << "\n";
  return 1;
}

int execute(const char* command, const Options& opts) {
  std::ifstream in(opts.config, std::ios::binary);
  if (!in) return fail_with("IoError: cannot read config file '" + opts.config + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  lsr_run_result* result = nullptr;
  const unsigned flags = opts.no_timestamp ? LSR_RUN_NO_TIMESTAMP : 0u;
  const lsr_status status =
      lsr_run(command, text.c_str(), opts.format.empty() ? nullptr : opts.format.c_str(), flags, &result);
  if (status != LSR_OK) return fail_with(lsr_last_error_message());

  std::string path = opts.out;
  if (path.empty() && lsr_run_result_output_path(result)) path = lsr_run_result_output_path(result);
  const std::string report = lsr_run_result_text(result);
  const int code = lsr_run_result_exit_code(result);
  lsr_run_result_free(result);

  if (path.empty() || path == "-") {
    std::fwrite(report.data(), 1, report.size(), stdout);
    std::fflush(stdout);
  } else {
    std::ofstream out(path, std::ios::binary);
    out << report;
    if (!out) return fail_with("IoError: cannot write report to '" + path + "'");
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lyapunov-Schmidt reduction with certified implicit-function bounds"};
  app.set_version_flag("--version", std::string("lsred ") + lsr_version());
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opts.out, "Report path (default: output.path from the config, else stdout)");
    sub->add_option("--format", opts.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_flag("--no-timestamp", opts.no_timestamp, "Omit the run timestamp from the report");
  };
  add_common(app.add_subcommand("ls-certify", "Certify the reduction region on an (r_par, r_perp) grid"));
  add_common(app.add_subcommand("imft-certify", "Certify implicit-function bounds for a declared variable split"));
  add_common(app.add_subcommand("reduce", "Evaluate the reduced map g and the implicit map on given points"));
  add_common(app.add_subcommand("trace", "Trace equilibrium branches and classify the bifurcation"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  return execute(app.get_subcommands().front()->get_name().c_str(), opts);
}
