#include "lsr/config.hpp"

#include <cmath>
#include <memory>
#include <set>

#include "lsr/errors.hpp"

namespace lsr {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, path + ": " + what);
}

/// Strict view of one JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) config_error(path(key), "required field is missing");
    seen_.insert(key);
    return j_.at(key);
  }

  const json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    seen_.insert(key);
    return &j_.at(key);
  }

  std::string path(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key)) config_error(path(key), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) config_error(path, "expected a finite number");
  return v;
}

double as_positive(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v > 0.0)) config_error(path, "expected a positive number");
  return v;
}

double as_nonnegative(const json& j, const std::string& path) {
  const double v = as_number(j, path);
  if (!(v >= 0.0)) config_error(path, "expected a nonnegative number");
  return v;
}

int as_int(const json& j, const std::string& path, int min_value) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    config_error(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < min_value || v > 100000000)
    config_error(path, "expected an integer >= " + std::to_string(min_value));
  return static_cast<int>(v);
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) config_error(path, "expected a string");
  return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_error(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const Vector row = as_vector(j[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) {
      cols = static_cast<std::size_t>(row.size());
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<std::size_t>(row.size()) != cols) {
      config_error(path, "rows have different lengths");
    }
    out.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return out;
}

std::vector<double> as_grid(const json& j, const std::string& path) {
  std::vector<double> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  } else if (j.is_object()) {
    Fields f(j, path);
    const double start = as_number(f.at("start"), f.path("start"));
    const double stop = as_number(f.at("stop"), f.path("stop"));
    const double step = as_positive(f.at("step"), f.path("step"));
    f.finish();
    if (stop < start) config_error(path, "stop must not be below start");
    if ((stop - start) / step > 1e6) config_error(path, "grid has more than 10^6 points");
    out = arithmetic_grid(start, stop, step);
  } else {
    config_error(path, "expected an array of numbers or {start, stop, step}");
  }
  if (out.empty()) config_error(path, "grid is empty");
  return out;
}

std::vector<double> as_positive_grid(const json& j, const std::string& path) {
  auto g = as_grid(j, path);
  for (double r : g)
    if (!(r > 0.0)) config_error(path, "radii must be positive");
  return g;
}

std::vector<std::string> as_names(const json& j, const std::string& path) {
  if (!j.is_array()) config_error(path, "expected an array of variable names");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ModelConfig parse_model(const json& j, const std::string& path) {
  Fields f(j, path);
  ModelConfig mc;
  const bool builtin = f.has("builtin");
  const bool expr = f.has("expr");
  if (builtin == expr) config_error(path, "exactly one of 'builtin' or 'expr' is required");
  if (builtin) {
    mc.builtin = as_string(f.at("builtin"), f.path("builtin"));
    if (const json* p = f.find("params")) {
      Fields pf(*p, f.path("params"));
      if (const json* a = pf.find("A")) mc.params.A = as_matrix(*a, pf.path("A"));
      if (const json* b = pf.find("b")) {
        if (b->is_array() && !b->empty() && (*b)[0].is_array()) {
          mc.params.B = as_matrix(*b, pf.path("b"));
        } else {
          mc.params.B = Matrix(as_vector(*b, pf.path("b")));
        }
      }
      pf.finish();
    }
  } else {
    Fields ef(f.at("expr"), f.path("expr"));
    mc.expr_source = as_string(ef.at("source"), ef.path("source"));
    mc.n = as_int(ef.at("n"), ef.path("n"), 1);
    mc.m = as_int(ef.at("m"), ef.path("m"), 0);
    ef.finish();
  }
  f.finish();
  return mc;
}

EstimatorConfig parse_estimator(const json& j, const std::string& path) {
  Fields f(j, path);
  EstimatorConfig ec;
  if (const json* m = f.find("mode")) {
    const std::string mode = as_string(*m, f.path("mode"));
    if (mode == "sampled") {
      ec.mode = SupremumEstimator::Mode::Sampled;
    } else if (mode == "analytic") {
      ec.mode = SupremumEstimator::Mode::Analytic;
    } else {
      config_error(f.path("mode"), "expected 'sampled' or 'analytic'");
    }
  }
  if (const json* s = f.find("samples_per_dim"))
    ec.samples_per_dim = as_int(*s, f.path("samples_per_dim"), 1);
  if (const json* s = f.find("safety_factor")) {
    ec.safety_factor = as_number(*s, f.path("safety_factor"));
    if (ec.safety_factor < 1.0) config_error(f.path("safety_factor"), "must be >= 1");
  }
  for (const char* key : {"L_par", "L_perp", "L_x", "L_y"}) {
    if (const json* e = f.find(key)) {
      const std::string text = as_string(*e, f.path(key));
      const std::string k = key;
      if (k == "L_par") ec.L_par = text;
      if (k == "L_perp") ec.L_perp = text;
      if (k == "L_x") ec.L_x = text;
      if (k == "L_y") ec.L_y = text;
    }
  }
  f.finish();
  return ec;
}

NewtonSettings parse_newton(const json& j, const std::string& path) {
  Fields f(j, path);
  NewtonSettings ns;
  if (const json* v = f.find("tol")) ns.tol = as_positive(*v, f.path("tol"));
  if (const json* v = f.find("max_iters")) ns.max_iters = as_int(*v, f.path("max_iters"), 1);
  if (const json* v = f.find("max_backtracks"))
    ns.max_backtracks = as_int(*v, f.path("max_backtracks"), 0);
  f.finish();
  return ns;
}

ReduceTask parse_reduce(const json& j, const std::string& path) {
  Fields f(j, path);
  ReduceTask t;
  if (const json* pts = f.find("points")) {
    if (f.has("alpha") || f.has("lambda"))
      config_error(path, "give either 'points' or 'alpha'/'lambda' grids, not both");
    if (!pts->is_array() || pts->empty()) config_error(f.path("points"), "expected a nonempty array");
    for (std::size_t i = 0; i < pts->size(); ++i) {
      const std::string p = f.path("points") + "[" + std::to_string(i) + "]";
      Fields pf((*pts)[i], p);
      ReducePoint rp;
      rp.alpha = as_vector(pf.at("alpha"), pf.path("alpha"));
      rp.lambda = as_vector(pf.at("lambda"), pf.path("lambda"));
      pf.finish();
      t.points.push_back(std::move(rp));
    }
  } else {
    const auto alphas = as_grid(f.at("alpha"), f.path("alpha"));
    const auto lambdas = as_grid(f.at("lambda"), f.path("lambda"));
    for (double l : lambdas)
      for (double a : alphas) {
        ReducePoint rp{Vector::Constant(1, a), Vector::Constant(1, l)};
        t.points.push_back(std::move(rp));
      }
  }
  f.finish();
  return t;
}

TraceSettings parse_trace(const json& j, const std::string& path) {
  Fields f(j, path);
  TraceSettings s;
  {
    Fields lf(f.at("lambda"), f.path("lambda"));
    s.lambda_min = as_number(lf.at("min"), lf.path("min"));
    s.lambda_max = as_number(lf.at("max"), lf.path("max"));
    s.lambda_step = as_positive(lf.at("step"), lf.path("step"));
    lf.finish();
    if (s.lambda_max < s.lambda_min) config_error(f.path("lambda"), "max must not be below min");
    if ((s.lambda_max - s.lambda_min) / s.lambda_step > 1e6)
      config_error(f.path("lambda"), "more than 10^6 parameter steps");
  }
  {
    Fields af(f.at("alpha"), f.path("alpha"));
    s.alpha_min = as_number(af.at("min"), af.path("min"));
    s.alpha_max = as_number(af.at("max"), af.path("max"));
    if (const json* p = af.find("points")) s.alpha_points = as_int(*p, af.path("points"), 2);
    af.finish();
    if (!(s.alpha_max > s.alpha_min)) config_error(f.path("alpha"), "max must exceed min");
  }
  if (const json* v = f.find("root_tol")) s.root_tol = as_positive(*v, f.path("root_tol"));
  if (const json* v = f.find("zero_tol")) s.zero_tol = as_nonnegative(*v, f.path("zero_tol"));
  if (const json* v = f.find("accept_residual"))
    s.accept_residual = as_positive(*v, f.path("accept_residual"));
  if (const json* v = f.find("match_radius")) s.match_radius = as_positive(*v, f.path("match_radius"));
  f.finish();
  return s;
}

std::function<double(double)> closed_form_1(const std::string& text, const char* var) {
  expr::Variables vars;
  vars.names = {var};
  auto ast = std::make_shared<const expr::Ast>(expr::parse_single(text, vars));
  return [ast](double r) {
    const double v = expr::evaluate(*ast, std::span<const double>(&r, 1));
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "analytic L override is not finite");
    return v;
  };
}

std::function<double(double, double)> closed_form_2(const std::string& text, const char* var1,
                                                    const char* var2) {
  expr::Variables vars;
  vars.names = {var1, var2};
  auto ast = std::make_shared<const expr::Ast>(expr::parse_single(text, vars));
  return [ast](double a, double b) {
    const double values[2] = {a, b};
    const double v = expr::evaluate(*ast, values);
    if (!std::isfinite(v)) fail(ErrorCode::NonFinite, "analytic L override is not finite");
    return v;
  };
}

}  // namespace

std::vector<double> arithmetic_grid(double start, double stop, double step) {
  std::vector<double> out;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

RunConfig parse_config(const json& j) {
  const std::string root = "config";
  Fields f(j, root);
  RunConfig c;
  c.source = j;
  c.model = parse_model(f.at("model"), f.path("model"));
  {
    Fields bp(f.at("base_point"), f.path("base_point"));
    c.x0 = as_vector(bp.at("x0"), bp.path("x0"));
    c.lambda0 = as_vector(bp.at("lambda0"), bp.path("lambda0"));
    bp.finish();
  }
  if (const json* v = f.find("norm")) {
    const std::string name = as_string(*v, f.path("norm"));
    const auto kind = parse_norm(name);
    if (!kind) config_error(f.path("norm"), "expected 'spectral', 'one' or 'infinity'");
    c.norm = *kind;
  }
  if (const json* v = f.find("rank_tol")) c.rank_tol = as_nonnegative(*v, f.path("rank_tol"));
  if (const json* v = f.find("equilibrium_tol"))
    c.equilibrium_tol = as_positive(*v, f.path("equilibrium_tol"));
  if (const json* v = f.find("par_weights")) {
    const Vector w = as_vector(*v, f.path("par_weights"));
    for (Eigen::Index i = 0; i < w.size(); ++i)
      if (!(w(i) > 0.0)) config_error(f.path("par_weights"), "weights must be positive");
    c.par_weights.assign(w.data(), w.data() + w.size());
  }
  if (const json* v = f.find("estimator")) c.estimator = parse_estimator(*v, f.path("estimator"));
  if (const json* v = f.find("newton")) c.newton = parse_newton(*v, f.path("newton"));
  if (const json* v = f.find("certify")) {
    Fields cf(*v, f.path("certify"));
    CertifyTask t;
    t.r_par = as_positive_grid(cf.at("r_par"), cf.path("r_par"));
    t.r_perp = as_positive_grid(cf.at("r_perp"), cf.path("r_perp"));
    cf.finish();
    c.certify = std::move(t);
  }
  if (const json* v = f.find("imft")) {
    Fields imf(*v, f.path("imft"));
    ImftTask t;
    Fields sf(imf.at("split"), imf.path("split"));
    t.x_vars = as_names(sf.at("x"), sf.path("x"));
    t.y_vars = as_names(sf.at("y"), sf.path("y"));
    sf.finish();
    t.r_x = as_positive_grid(imf.at("r_x"), imf.path("r_x"));
    t.r_y = as_positive_grid(imf.at("r_y"), imf.path("r_y"));
    imf.finish();
    c.imft = std::move(t);
  }
  if (const json* v = f.find("reduce")) c.reduce = parse_reduce(*v, f.path("reduce"));
  if (const json* v = f.find("trace")) c.trace = parse_trace(*v, f.path("trace"));
  if (const json* v = f.find("output")) {
    Fields of(*v, f.path("output"));
    if (const json* p = of.find("path")) c.output.path = as_string(*p, of.path("path"));
    if (const json* p = of.find("format")) {
      const std::string fmt = as_string(*p, of.path("format"));
      if (fmt != "json" && fmt != "csv") config_error(of.path("format"), "expected 'json' or 'csv'");
      c.output.format = fmt;
    }
    of.finish();
  }
  f.finish();

  if (c.model.expr_source) {
    if (c.x0.size() != c.model.n)
      config_error("config.base_point.x0", "length must equal model n = " + std::to_string(c.model.n));
    if (c.lambda0.size() != c.model.m)
      config_error("config.base_point.lambda0",
                   "length must equal model m = " + std::to_string(c.model.m));
  }
  return c;
}

RunConfig parse_config_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

ParametricSystem build_system(const RunConfig& cfg) {
  ParametricSystem sys = cfg.model.builtin ? builtin_model(*cfg.model.builtin, cfg.model.params)
                                           : expr_model(*cfg.model.expr_source, cfg.model.n, cfg.model.m);
  if (cfg.x0.size() != sys.n())
    config_error("config.base_point.x0", "length must equal the model state dimension " +
                                             std::to_string(sys.n()));
  if (cfg.lambda0.size() != sys.m())
    config_error("config.base_point.lambda0", "length must equal the model parameter dimension " +
                                                  std::to_string(sys.m()));
  return sys;
}

namespace {

SupremumEstimator base_estimator(const RunConfig& cfg) {
  SupremumEstimator est;
  est.mode = cfg.estimator.mode;
  est.samples_per_dim = cfg.estimator.samples_per_dim;
  est.safety_factor = cfg.estimator.safety_factor;
  return est;
}

}  // namespace

SupremumEstimator build_ls_estimator(const RunConfig& cfg) {
  SupremumEstimator est = base_estimator(cfg);
  const auto& e = cfg.estimator;
  if (e.L_x || e.L_y)
    config_error("config.estimator", "L_x/L_y overrides apply to imft-certify; use L_par/L_perp");
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!e.L_par || !e.L_perp)
      config_error("config.estimator", "analytic mode needs both L_par and L_perp expressions");
    est.L_x_override = closed_form_1(*e.L_par, "r_par");
    est.L_y_override = closed_form_2(*e.L_perp, "r_par", "r_perp");
  } else if (e.L_par || e.L_perp) {
    config_error("config.estimator", "L_par/L_perp overrides require mode 'analytic'");
  }
  return est;
}

SupremumEstimator build_imft_estimator(const RunConfig& cfg) {
  SupremumEstimator est = base_estimator(cfg);
  const auto& e = cfg.estimator;
  if (e.L_par || e.L_perp)
    config_error("config.estimator", "L_par/L_perp overrides apply to ls-certify; use L_x/L_y");
  if (est.mode == SupremumEstimator::Mode::Analytic) {
    if (!e.L_x || !e.L_y)
      config_error("config.estimator", "analytic mode needs both L_x and L_y expressions");
    est.L_x_override = closed_form_1(*e.L_x, "r_x");
    est.L_y_override = closed_form_2(*e.L_y, "r_x", "r_y");
  } else if (e.L_x || e.L_y) {
    config_error("config.estimator", "L_x/L_y overrides require mode 'analytic'");
  }
  return est;
}

}  // namespace lsr
