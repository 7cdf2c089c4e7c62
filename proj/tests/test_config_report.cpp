#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "lsr/config.hpp"
#include "lsr/run.hpp"
#include "oracles.hpp"

using namespace lsr;
using testing::code_of;
using testing::message_of;

namespace {

using nlohmann::json;

json tanh2_config() {
  return json::parse(R"J({
    "model": {"builtin": "tanh2"},
    "base_point": {"x0": [0, 0], "lambda0": [1]},
    "estimator": {"mode": "analytic", "L_par": "0", "L_perp": "1 - min(0, 1 - r_par)"},
    "certify": {"r_par": [0.5, 1.0, 1.5, 1.9, 2.1], "r_perp": [0.5, 1, 2]}
  })J");
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("config errors name the field") {
  auto j = tanh2_config();
  j["estimator"]["bogus"] = 1;
  const auto msg = message_of([&] { parse_config(j); });
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);
  CHECK(msg.find("config.estimator.bogus") != std::string::npos);

  j = tanh2_config();
  j["certify"]["r_par"] = json::array({0.5, -1});
  CHECK(message_of([&] { parse_config(j); }).find("config.certify.r_par") != std::string::npos);

  j = tanh2_config();
  j.erase("base_point");
  CHECK(message_of([&] { parse_config(j); }).find("config.base_point") != std::string::npos);

  j = tanh2_config();
  j["norm"] = "frobenius";
  CHECK(message_of([&] { parse_config(j); }).find("config.norm") != std::string::npos);

  j = tanh2_config();
  j["model"]["expr"] = {{"source", "x1"}, {"n", 1}, {"m", 0}};
  CHECK(code_of([&] { parse_config(j); }) == ErrorCode::ConfigError);

  CHECK(code_of([] { parse_config_text("{ not json"); }) == ErrorCode::ConfigError);
}

TEST_CASE("grids given as ranges") {
  auto j = tanh2_config();
  j["certify"]["r_par"] = {{"start", 0.1}, {"stop", 0.5}, {"step", 0.1}};
  const auto cfg = parse_config(j);
  REQUIRE(cfg.certify->r_par.size() == 5);
  CHECK(cfg.certify->r_par.back() == doctest::Approx(0.5));
  CHECK(arithmetic_grid(0, 1, 0.25).size() == 5);
}

TEST_CASE("override slots must match the command") {
  auto j = tanh2_config();
  CHECK(code_of([&] { build_imft_estimator(parse_config(j)); }) == ErrorCode::ConfigError);
  j["estimator"].erase("L_perp");
  CHECK(code_of([&] { build_ls_estimator(parse_config(j)); }) == ErrorCode::ConfigError);
}

TEST_CASE("certification report survives a JSON round trip") {
  const auto report = run_ls_certify(parse_config(tanh2_config()));
  CHECK(report.any_pass());
  const auto text = render_json(to_json(report));
  const auto back = certification_from_json(json::parse(text));
  CHECK(back == report);
  CHECK(render_json(to_json(back)) == text);
}

TEST_CASE("certification passes exactly below r_par = 2") {
  const auto report = run_ls_certify(parse_config(tanh2_config()));
  REQUIRE(report.region.size() == 15);
  for (const auto& row : report.region) CHECK(row.pass == (row.r_free < 2.0));
  for (const auto& f : report.frontier) {
    REQUIRE(f.r_free_max);
    CHECK(*f.r_free_max == 1.9);
  }
}

TEST_CASE("runs are deterministic without a timestamp") {
  const auto cfg = parse_config(tanh2_config());
  RunOptions opts;
  opts.timestamp = false;
  const auto a = run(Command::LsCertify, cfg, opts);
  const auto b = run(Command::LsCertify, cfg, opts);
  CHECK(a.text == b.text);
  CHECK(a.exit_code == 0);
  CHECK(a.format == Format::Json);
  opts.format = Format::Csv;
  CHECK(run(Command::LsCertify, cfg, opts).text == run(Command::LsCertify, cfg, opts).text);
}

TEST_CASE("expression model matches the built-in byte for byte") {
  auto j = tanh2_config();
  j["model"] = {{"expr", {{"source", "-x1 + tanh(l1*x2); -x2 + tanh(l1*x1)"}, {"n", 2}, {"m", 1}}}};
  j["estimator"] = {{"mode", "sampled"}, {"samples_per_dim", 17}};
  auto k = tanh2_config();
  k["estimator"] = j["estimator"];
  const auto from_expr = run_ls_certify(parse_config(j));
  const auto builtin = run_ls_certify(parse_config(k));
  CHECK(from_expr.M_free == builtin.M_free);
  CHECK(from_expr.M_solved == builtin.M_solved);
  CHECK(from_expr.L_free == builtin.L_free);
  CHECK(from_expr.L_solved == builtin.L_solved);
  CHECK(from_expr.region == builtin.region);
}

TEST_CASE("exit code 2 when nothing certifies") {
  auto j = tanh2_config();
  j["certify"]["r_par"] = json::array({2.5, 3.0});
  CHECK(run(Command::LsCertify, parse_config(j)).exit_code == 2);
}

TEST_CASE("non-singular base point is an error") {
  auto j = tanh2_config();
  j["base_point"]["lambda0"] = json::array({0.5});
  CHECK(code_of([&] { run(Command::LsCertify, parse_config(j)); }) == ErrorCode::NonSingularJacobian);
}

TEST_CASE("imft certification of y = x^2") {
  const auto j = json::parse(R"J({
    "model": {"expr": {"source": "l1 - x1^2", "n": 1, "m": 1}},
    "base_point": {"x0": [0], "lambda0": [0]},
    "estimator": {"samples_per_dim": 33},
    "imft": {"split": {"x": ["x1"], "y": ["l1"]}, "r_x": [0.1, 0.2, 0.3], "r_y": [0.1, 0.3]}
  })J");
  const auto report = run_imft_certify(parse_config(j));
  CHECK_FALSE(report.decomposition);
  CHECK(report.M_free == 0.0);
  CHECK(report.M_solved == 1.0);
  std::set<std::pair<double, double>> got;
  for (const auto& row : report.region)
    if (row.pass) got.insert({row.r_free, row.r_solved});
  const std::set<std::pair<double, double>> want = {{0.1, 0.1}, {0.1, 0.3}, {0.2, 0.1}, {0.2, 0.3}, {0.3, 0.3}};
  CHECK(got == want);
  const auto rendered = to_json(report);
  CHECK(rendered["quantities"].contains("M_x"));
  CHECK(rendered["region"][0].contains("r_y"));
}

TEST_CASE("imft split errors") {
  auto j = json::parse(R"J({
    "model": {"expr": {"source": "l1 - x1^2", "n": 1, "m": 1}},
    "base_point": {"x0": [0], "lambda0": [0]},
    "imft": {"split": {"x": ["x1"], "y": ["l1"]}, "r_x": [0.1], "r_y": [0.1]}
  })J");
  SUBCASE("missing imft block") {
    auto k = j;
    k.erase("imft");
    CHECK(code_of([&] { run_imft_certify(parse_config(k)); }) == ErrorCode::ConfigError);
  }
  SUBCASE("missing split") {
    auto k = j;
    k["imft"].erase("split");
    CHECK(code_of([&] { parse_config(k); }) == ErrorCode::ConfigError);
  }
  SUBCASE("unknown name") {
    auto k = j;
    k["imft"]["split"]["y"] = json::array({"z1"});
    CHECK(code_of([&] { run_imft_certify(parse_config(k)); }) == ErrorCode::ConfigError);
  }
  SUBCASE("wrong y count") {
    auto k = j;
    k["imft"]["split"]["x"] = json::array();
    k["imft"]["split"]["y"] = json::array({"x1", "l1"});
    CHECK(code_of([&] { run_imft_certify(parse_config(k)); }) == ErrorCode::ConfigError);
  }
  SUBCASE("not an equilibrium") {
    auto k = j;
    k["base_point"]["lambda0"] = json::array({1});
    CHECK(code_of([&] { run_imft_certify(parse_config(k)); }) == ErrorCode::NotEquilibrium);
  }
}

TEST_CASE("reduce rows follow the closed form") {
  auto j = tanh2_config();
  j["reduce"] = json::parse(R"J({"alpha": {"start": -1, "stop": 1, "step": 0.25}, "lambda": [0.8, 1.0, 1.3]})J");
  const auto report = run_reduce(parse_config(j));
  REQUIRE(report.rows.size() == 27);
  CHECK(report.q == 1);
  for (const auto& row : report.rows) {
    CHECK(row.status == "ok");
    CHECK(std::abs(row.g(0) - oracle::tanh2_g(row.alpha(0), row.lambda(0))) <= 1e-10);
  }
  RunOptions opts;
  opts.timestamp = false;
  const auto csv = run(Command::Reduce, parse_config(j), opts);
  CHECK(csv.format == Format::Csv);
  CHECK(lines_of(csv.text).front() == "alpha,lambda,g,beta_1,iterations,phi_residual,warnings,status");
}

TEST_CASE("trace report classifies the tanh pitchfork") {
  auto j = tanh2_config();
  j["trace"] = json::parse(R"J({"lambda": {"min": 0.5, "max": 1.5, "step": 0.05}, "alpha": {"min": -2, "max": 2}})J");
  const auto report = run_trace(parse_config(j));
  REQUIRE(report.classification);
  CHECK(report.classification->label == "pitchfork");
  CHECK(report.classification->subtype == "supercritical");
  CHECK(run(Command::Trace, parse_config(j)).exit_code == 0);
  const auto csv = to_csv(report);
  CHECK(csv.find("classification,pitchfork") != std::string::npos);
}

TEST_CASE("CSV formatting") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_double(0.1)) == 0.1);
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(format_double(NAN) == "nan");
  const auto csv = to_csv(run_ls_certify(parse_config(tanh2_config())));
  CHECK(csv.find("\r\n") != std::string::npos);
}

TEST_CASE("command names") {
  for (Command c : {Command::LsCertify, Command::ImftCertify, Command::Reduce, Command::Trace})
    CHECK(parse_command(command_name(c)) == c);
  CHECK_FALSE(parse_command("certify"));
}
