// Acceptance checks: one PASS/FAIL line per criterion with its runtime.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lsr/imft_bounds.hpp"
#include "lsr/ls_bounds.hpp"
#include "lsr/reduction.hpp"
#include "lsr/run.hpp"
#include "oracles.hpp"

using namespace lsr;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

SplitSystem tanh2_at(double lambda) {
  const auto sys = builtin_model("tanh2");
  return build_split_system(sys, make_point(sys, vec({0, 0}), vec({lambda})));
}

double closed_form_L_perp(double r_par, double) { return 1.0 - std::min(0.0, 1.0 - r_par); }

SupremumEstimator closed_form_overrides() {
  return SupremumEstimator::analytic([](double) { return 0.0; }, closed_form_L_perp);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome exact_quantities() {
  Outcome o;
  const auto ss = tanh2_at(1.0);
  const auto m = compute_ls_M(ss);
  o.require(std::abs(m.M_par) <= 1e-12, "M_par = " + num(m.M_par));
  o.require(std::abs(m.M_perp - 0.5) <= 1e-12, "M_perp = " + num(m.M_perp));
  double worst = 0.0;
  for (double r : {0.1, 0.5, 1.0, 1.9}) worst = std::max(worst, estimate_ls_L(ss, r, 1.0, SupremumEstimator::sampled()).L_par);
  o.require(worst <= 1e-10, "sampled L_par up to " + num(worst));
  o.detail = o.pass ? "M_par=" + num(m.M_par) + " M_perp=" + num(m.M_perp) + " max L_par=" + num(worst) : o.detail;
  return o;
}

Outcome certified_frontier() {
  Outcome o;
  const auto ss = tanh2_at(1.0);
  const auto est = closed_form_overrides();
  const std::vector<double> r_perp = {0.1, 1.0, 10.0};
  for (const auto& e : certify_ls_region(ss, {1.99}, r_perp, est).entries)
    o.require(e.pass, "(1.99, " + num(e.r_perp) + ") not certified");
  for (const auto& e : certify_ls_region(ss, {2.0, 2.1}, r_perp, est).entries)
    o.require(!e.pass, "(" + num(e.r_par) + ", " + num(e.r_perp) + ") certified");
  const auto grid = arithmetic_grid(1.5, 2.1, 0.01);
  const auto region = certify_ls_region(ss, grid, r_perp, est);
  std::string frontier;
  for (const auto& f : region.frontier) {
    const bool ok = f.r_par_max && *f.r_par_max >= 1.98 && *f.r_par_max <= 2.0;
    o.require(ok, "frontier at r_perp " + num(f.r_perp) + " outside [1.98, 2.0]");
    if (f.r_par_max) frontier += (frontier.empty() ? "" : ",") + num(*f.r_par_max);
  }
  if (o.pass) o.detail = "frontier r_par_max=" + frontier;
  return o;
}

Outcome sampled_vs_analytic() {
  Outcome o;
  const auto ss = tanh2_at(1.0);
  std::string table;
  for (double rp : {0.5, 1.0, 1.5}) {
    for (double rq : {0.5, 2.0}) {
      const double sampled = estimate_ls_L(ss, rp, rq, SupremumEstimator::sampled(33)).L_perp;
      const double analytic = closed_form_L_perp(rp, rq);
      const double dense = oracle::tanh2_dense_L_perp(rp, rq, 100);
      const double rel = std::abs(sampled - analytic) / analytic;
      table += " (" + num(rp) + "," + num(rq) + "): sampled=" + num(sampled) + " analytic=" + num(analytic) +
               " dense=" + num(dense) + " rel=" + num(rel);
      if (rel > 0.05) o.pass = false;
    }
  }
  o.detail = table.substr(1);
  return o;
}

Outcome pitchfork_classification() {
  Outcome o;
  const auto sys = builtin_model("tanh2");
  const ReducedMap rm(build_split_system(sys, make_point(sys, vec({0, 0}), vec({1}))));
  const auto c = series_coefficients(rm);
  o.require(std::abs(c.g_a) <= 1e-6, "g_a = " + num(c.g_a));
  o.require(std::abs(c.g_aa) <= 1e-6, "g_aa = " + num(c.g_aa));
  o.require(std::abs(c.g_aaa + 1) <= 1e-4, "g_aaa = " + num(c.g_aaa));
  o.require(std::abs(c.g_al - 1) <= 1e-5, "g_al = " + num(c.g_al));
  if (o.pass)
    o.detail = "g_a=" + num(c.g_a) + " g_aa=" + num(c.g_aa) + " g_aaa=" + num(c.g_aaa) + " g_al=" + num(c.g_al) +
               " (" + classify(c).label + ")";
  return o;
}

// Plain Newton on the full system; nullopt unless it converges.
std::optional<Vector> full_newton(const ParametricSystem& sys, Vector x, const Vector& lambda) {
  for (int k = 0; k < 100; ++k) {
    const Vector f = sys.eval(x, lambda);
    if (!f.allFinite()) return std::nullopt;
    if (f.norm() <= 1e-13) return x;
    const Matrix J = sys.jacobians(x, lambda).dx;
    Eigen::FullPivLU<Matrix> lu(J);
    if (!lu.isInvertible()) return std::nullopt;
    x -= lu.solve(f);
  }
  return std::nullopt;
}

Outcome zero_correspondence() {
  Outcome o;
  const auto sys = builtin_model("tanh2");
  const auto ss = build_split_system(sys, make_point(sys, vec({0, 0}), vec({1})));
  const auto region = certify_ls_region(ss, arithmetic_grid(0.1, 1.9, 0.1), {0.1, 1.0, 10.0}, closed_form_overrides());
  const ReducedMap rm(ss, {}, region);

  TraceSettings s;
  s.lambda_min = 0.5;
  s.lambda_max = 2.0;
  s.lambda_step = 0.01;
  s.alpha_min = -2.0;
  s.alpha_max = 2.0;
  const auto traced = trace_branches(rm, s);
  std::vector<Vector> at_target;
  for (const auto& b : traced.branches)
    for (const auto& p : b.points)
      if (std::abs(p.lambda(0) - 1.5) < 1e-9) at_target.push_back(p.x);

  const double x_bisect = oracle::tanh2_nontrivial_x(1.5);
  double err = INFINITY;
  for (const auto& x : at_target)
    if (x(0) > 0.1) err = std::min(err, std::abs(x(0) - x_bisect));
  o.require(err <= 1e-8, "nontrivial root error " + num(err));

  const auto& d = ss.decomposition();
  int found = 0, missing = 0;
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) {
      const double a = -1.9 + 3.8 * i / 39;
      const double b = -2.0 + 4.0 * j / 39;
      const auto x = full_newton(sys, join_state(d, vec({a}), vec({b})), vec({1.5}));
      if (!x) continue;
      const auto parts = split_state(d, *x);
      if (!rm.in_region(parts.alpha, vec({1.5}), parts.beta)) continue;
      ++found;
      bool matched = false;
      for (const auto& t : at_target) matched = matched || (t - *x).norm() <= 1e-6;
      if (!matched) ++missing;
    }
  }
  o.require(found > 0, "Newton sweep found no equilibria");
  o.require(missing == 0, std::to_string(missing) + " equilibria missing from the trace");
  if (o.pass)
    o.detail = "x*=" + num(x_bisect) + " err=" + num(err) + " sweep hits=" + std::to_string(found) +
               " traced roots at 1.5=" + std::to_string(at_target.size());
  return o;
}

Outcome imft_oracle() {
  Outcome o;
  SplitMap f;
  f.nx = 1;
  f.ny = 1;
  f.eval = [](const Vector& x, const Vector& y) { return Vector(y.array() - x.array().square()); };
  f.jacobians = [](const Vector& x, const Vector&) {
    return PartialJacobians{Matrix::Constant(1, 1, -2 * x(0)), Matrix::Constant(1, 1, 1.0)};
  };
  const Vector zero = Vector::Zero(1);
  const auto q = make_quantities(f, zero, zero, SupremumEstimator::sampled(), NormKind::Spectral);
  const std::vector<double> rx = {0.1, 0.2, 0.3};
  const std::vector<double> ry = {0.1, 0.3};
  std::set<std::pair<double, double>> got, want;
  for (double a : rx)
    for (double b : ry)
      if (2 * a * a < b) want.insert({a, b});
  std::mt19937_64 rng(11);
  int witnesses = 0;
  for (const auto& e : certify_region(q, rx, ry)) {
    if (!e.verdict.pass) continue;
    got.insert({e.r_x, e.r_y});
    std::uniform_real_distribution<double> u(-e.r_x, e.r_x);
    for (int k = 0; k < 100; ++k) {
      const auto w = newton_witness(f, vec({u(rng)}), zero, zero);
      o.require(w.converged && std::abs(w.y(0)) < e.r_y, "witness failed in (" + num(e.r_x) + ", " + num(e.r_y) + ")");
      ++witnesses;
    }
  }
  o.require(got == want, "certified set " + std::to_string(got.size()) + " pairs, oracle " +
                             std::to_string(want.size()));
  if (o.pass) o.detail = std::to_string(got.size()) + " certified pairs match; " + std::to_string(witnesses) + " witnesses";
  return o;
}

Outcome property_suites() {
  Outcome o;
  const std::string cmd = std::string("\"") + LSR_UNIT_TESTS +
                          "\" --test-case=\"random singular*,forward-mode*,sampled L*\" --minimal > /dev/null 2>&1";
  o.require(std::system(cmd.c_str()) == 0, "property suites failed");

  RunOptions opts;
  opts.timestamp = false;
  const std::string configs = LSR_CONFIG_DIR;
  const std::string golden = LSR_GOLDEN_DIR;
  const auto ls = parse_config_text(read_file(configs + "/tanh2_ls_certify.json"));
  o.require(run(Command::LsCertify, ls, opts).text == read_file(golden + "/tanh2_ls_certify.json"),
            "ls-certify JSON differs from golden");
  opts.format = Format::Csv;
  o.require(run(Command::LsCertify, ls, opts).text == read_file(golden + "/tanh2_ls_certify.csv"),
            "ls-certify CSV differs from golden");
  opts.format.reset();
  const auto red = parse_config_text(read_file(configs + "/tanh2_reduce.json"));
  o.require(run(Command::Reduce, red, opts).text == read_file(golden + "/tanh2_reduce.csv"),
            "reduce CSV differs from golden");
  const auto imft = parse_config_text(read_file(configs + "/parabola_imft.json"));
  o.require(run(Command::ImftCertify, imft, opts).text == read_file(golden + "/parabola_imft.json"),
            "imft-certify JSON differs from golden");
  if (o.pass) o.detail = "property suites passed; 4 reports byte-identical to golden";
  return o;
}

Outcome negative_lambda() {
  Outcome o;
  const auto ss = tanh2_at(-1.0);
  const auto m = compute_ls_M(ss);
  // J = [[-1,-1],[-1,-1]]: range (1,1)/sqrt2 = Vperp, so W^T J Vperp = -2.
  Matrix J(2, 2);
  J << -1, -1, -1, -1;
  const Vector w = vec({1, 1}) / std::sqrt(2.0);
  const double hand = 1.0 / std::abs(w.dot(J * w));
  o.require(ss.q() == 1, "q = " + std::to_string(ss.q()));
  o.require(std::abs(m.M_perp - hand) <= 1e-12, "M_perp = " + num(m.M_perp) + ", hand " + num(hand));
  o.require(std::abs(hand - 0.5) <= 1e-15, "hand computation " + num(hand));
  const auto region = certify_ls_region(ss, {0.5, 1.0}, {1.0}, SupremumEstimator::sampled());
  o.require(!region.entries.empty(), "certification produced no entries");
  if (o.pass) o.detail = "q=1 M_perp=" + num(m.M_perp) + " (hand " + num(hand) + ")";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "tanh2 exact quantities", 1.0, exact_quantities},
      {2, "certified frontier below r_par = 2", 5.0, certified_frontier},
      {3, "sampled L_perp within 5% of the analytic bound", 30.0, sampled_vs_analytic},
      {4, "pitchfork coefficients", 1.0, pitchfork_classification},
      {5, "zero correspondence at lambda = 1.5", 60.0, zero_correspondence},
      {6, "implicit function oracle for y - x^2", 5.0, imft_oracle},
      {7, "property suites and golden reports", 120.0, property_suites},
      {8, "lambda = -1 analogue", 5.0, negative_lambda},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail += " [over time limit]";
    }
    if (!o.pass) ++failed;
    std::printf("criterion %d: %s  %s  (%.3f s, limit %.0f s)  %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs,
                c.limit_s, o.detail.c_str());
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed;
}
