#include "lsr/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lsr/errors.hpp"

namespace lsr {

using nlohmann::json;

const char* command_name(Command c) noexcept {
  switch (c) {
    case Command::LsCertify: return "ls-certify";
    case Command::ImftCertify: return "imft-certify";
    case Command::Reduce: return "reduce";
    case Command::Trace: return "trace";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) noexcept {
  for (Command c : {Command::LsCertify, Command::ImftCertify, Command::Reduce, Command::Trace})
    if (name == command_name(c)) return c;
  return std::nullopt;
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
  }
  return true;
}

[[noreturn]] void malformed(const std::string& what) {
  fail(ErrorCode::ConfigError, "report: " + what);
}

json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_from(const json& j, const char* key) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  malformed(std::string("field '") + key + "' is not a number");
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

double num_field(const json& j, const char* key) { return num_from(field(j, key), key); }

json vec(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Vector vec_from(const json& j, const char* key) {
  if (!j.is_array()) malformed(std::string("field '") + key + "' is not an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = num_from(j[i], key);
  return v;
}

json mat(const Matrix& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) rows.push_back(vec(a.row(i).transpose()));
  return rows;
}

Matrix mat_from(const json& j, const char* key) {
  if (!j.is_array()) malformed(std::string("field '") + key + "' is not an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Vector r = vec_from(j[static_cast<std::size_t>(i)], key);
    if (r.size() != cols) malformed(std::string("field '") + key + "' is ragged");
    a.row(i) = r.transpose();
  }
  return a;
}

json opt(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::optional<double> opt_from(const json& j, const char* key) {
  if (j.is_null()) return std::nullopt;
  return num_from(j, key);
}

struct Names {
  const char* r_free;
  const char* r_solved;
  const char* L_free;
  const char* L_solved;
  const char* M_free;
  const char* M_solved;
};

Names names_for(Command c) {
  if (c == Command::ImftCertify) return {"r_x", "r_y", "L_x", "L_y", "M_x", "M_y"};
  return {"r_par", "r_perp", "L_par", "L_perp", "M_par", "M_perp"};
}

json meta_json(const ReportMeta& m) {
  json j = json::object();
  j["tool"] = m.tool;
  j["version"] = m.version;
  j["command"] = command_name(m.command);
  j["norm"] = norm_name(m.norm);
  j["estimator_mode"] = m.estimator_mode;
  j["rigorous"] = m.rigorous;
  j["samples_per_dim"] = m.samples_per_dim;
  j["safety_factor"] = num(m.safety_factor);
  j["notes"] = m.notes;
  j["config"] = m.config;
  if (m.timestamp) j["timestamp"] = *m.timestamp;
  return j;
}

ReportMeta meta_from(const json& j) {
  ReportMeta m;
  try {
    m.tool = field(j, "tool").get<std::string>();
    m.version = field(j, "version").get<std::string>();
    const auto cmd = parse_command(field(j, "command").get<std::string>());
    if (!cmd) malformed("unknown command");
    m.command = *cmd;
    const auto norm = parse_norm(field(j, "norm").get<std::string>());
    if (!norm) malformed("unknown norm");
    m.norm = *norm;
    m.estimator_mode = field(j, "estimator_mode").get<std::string>();
    m.rigorous = field(j, "rigorous").get<bool>();
    m.samples_per_dim = field(j, "samples_per_dim").get<int>();
    m.safety_factor = num_field(j, "safety_factor");
    m.notes = field(j, "notes").get<std::vector<std::string>>();
    m.config = field(j, "config");
    if (j.contains("timestamp")) m.timestamp = j.at("timestamp").get<std::string>();
  } catch (const json::exception& e) {
    malformed(std::string("meta: ") + e.what());
  }
  return m;
}

json decomposition_json(const DecompositionSummary& d) {
  json j = json::object();
  j["n"] = d.n;
  j["q"] = d.q;
  j["rank"] = d.n - d.q;
  j["rank_tol"] = num(d.rank_tol);
  j["x0"] = vec(d.x0);
  j["lambda0"] = vec(d.lambda0);
  j["base_residual"] = num(d.base_residual);
  j["singular_values"] = vec(d.singular_values);
  j["V"] = mat(d.V);
  j["Vperp"] = mat(d.Vperp);
  j["W"] = mat(d.W);
  j["Wperp"] = mat(d.Wperp);
  return j;
}

DecompositionSummary decomposition_from(const json& j) {
  DecompositionSummary d;
  try {
    d.n = field(j, "n").get<int>();
    d.q = field(j, "q").get<int>();
  } catch (const json::exception& e) {
    malformed(std::string("decomposition: ") + e.what());
  }
  d.rank_tol = num_field(j, "rank_tol");
  d.x0 = vec_from(field(j, "x0"), "x0");
  d.lambda0 = vec_from(field(j, "lambda0"), "lambda0");
  d.base_residual = num_field(j, "base_residual");
  d.singular_values = vec_from(field(j, "singular_values"), "singular_values");
  // A basis with no columns serialises as n empty rows; keep the row count.
  auto basis = [&](const char* key, Eigen::Index cols) {
    Matrix a = mat_from(field(j, key), key);
    if (a.rows() == 0) a.resize(d.n, cols);
    return a;
  };
  d.V = basis("V", d.q);
  d.Vperp = basis("Vperp", d.n - d.q);
  d.W = basis("W", d.n - d.q);
  d.Wperp = basis("Wperp", d.q);
  return d;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> indexed(const char* base, Eigen::Index count, bool plain_if_single) {
  std::vector<std::string> out;
  if (count == 1 && plain_if_single) return {base};
  for (Eigen::Index i = 0; i < count; ++i) out.push_back(std::string(base) + "_" + std::to_string(i + 1));
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
}

void append_values(std::vector<std::string>& fields, const Vector& v, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) fields.push_back(i < v.size() ? format_double(v(i)) : "");
}

void append_meta_rows(std::string& out, const ReportMeta& m) {
  append_row(out, {"key", "value"});
  append_row(out, {"tool", m.tool});
  append_row(out, {"version", m.version});
  append_row(out, {"command", command_name(m.command)});
  append_row(out, {"norm", norm_name(m.norm)});
  append_row(out, {"estimator_mode", m.estimator_mode});
  append_row(out, {"rigorous", m.rigorous ? "true" : "false"});
  append_row(out, {"samples_per_dim", std::to_string(m.samples_per_dim)});
  append_row(out, {"safety_factor", format_double(m.safety_factor)});
  if (m.timestamp) append_row(out, {"timestamp", *m.timestamp});
  for (const auto& note : m.notes) append_row(out, {"note", note});
  append_row(out, {"config", m.config.dump()});
}

void append_decomposition_rows(std::string& out, const DecompositionSummary& d) {
  append_row(out, {"n", std::to_string(d.n)});
  append_row(out, {"q", std::to_string(d.q)});
  std::vector<std::string> sv;
  for (Eigen::Index i = 0; i < d.singular_values.size(); ++i)
    sv.push_back(format_double(d.singular_values(i)));
  append_row(out, {"singular_values", join(sv, ";")});
  append_row(out, {"base_residual", format_double(d.base_residual)});
}

}  // namespace

bool DecompositionSummary::operator==(const DecompositionSummary& o) const {
  return n == o.n && q == o.q && rank_tol == o.rank_tol && same(x0, o.x0) &&
         same(lambda0, o.lambda0) && base_residual == o.base_residual &&
         same(singular_values, o.singular_values) && same(V, o.V) && same(Vperp, o.Vperp) &&
         same(W, o.W) && same(Wperp, o.Wperp);
}

DecompositionSummary summarize(const SubspaceDecomposition& d, const Vector& x0,
                               const Vector& lambda0, double base_residual) {
  DecompositionSummary s;
  s.n = d.n();
  s.q = d.q;
  s.rank_tol = d.rank_tol;
  s.x0 = x0;
  s.lambda0 = lambda0;
  s.base_residual = base_residual;
  s.singular_values = d.singular_values;
  s.V = d.V;
  s.Vperp = d.Vperp;
  s.W = d.W;
  s.Wperp = d.Wperp;
  return s;
}

bool CertificationReport::any_pass() const noexcept {
  return std::any_of(region.begin(), region.end(), [](const RegionRow& r) { return r.pass; });
}

json to_json(const CertificationReport& r) {
  const Names nm = names_for(r.meta.command);
  json j = json::object();
  j["meta"] = meta_json(r.meta);
  j["decomposition"] = r.decomposition ? decomposition_json(*r.decomposition) : json(nullptr);

  json q = json::object();
  q[nm.M_free] = num(r.M_free);
  q[nm.M_solved] = num(r.M_solved);
  json lf = json::array();
  for (const auto& row : r.L_free) lf.push_back({{nm.r_free, num(row.r_free)}, {nm.L_free, num(row.L)}});
  json ls = json::array();
  for (const auto& row : r.L_solved)
    ls.push_back({{nm.r_free, num(row.r_free)}, {nm.r_solved, num(row.r_solved)}, {nm.L_solved, num(row.L)}});
  q[nm.L_free] = std::move(lf);
  q[nm.L_solved] = std::move(ls);
  j["quantities"] = std::move(q);

  json region = json::array();
  for (const auto& e : r.region) {
    json row = {{nm.r_free, num(e.r_free)},   {nm.r_solved, num(e.r_solved)},
                {nm.L_free, num(e.L_free)},   {nm.L_solved, num(e.L_solved)},
                {"margin_1", num(e.margin_1)}, {"margin_2", num(e.margin_2)},
                {"pass", e.pass}};
    if (!e.error.empty()) row["error"] = e.error;
    region.push_back(std::move(row));
  }
  j["region"] = std::move(region);

  json frontier = json::array();
  for (const auto& f : r.frontier) {
    frontier.push_back({{nm.r_solved, num(f.r_solved)},
                        {std::string(nm.r_free) + "_max", opt(f.r_free_max)},
                        {std::string(nm.r_free) + "_refined", opt(f.r_free_refined)}});
  }
  j["frontier"] = std::move(frontier);
  return j;
}

CertificationReport certification_from_json(const json& j) {
  if (!j.is_object()) malformed("expected an object");
  CertificationReport r;
  r.meta = meta_from(field(j, "meta"));
  const Names nm = names_for(r.meta.command);
  const json& d = field(j, "decomposition");
  if (!d.is_null()) r.decomposition = decomposition_from(d);

  const json& q = field(j, "quantities");
  r.M_free = num_field(q, nm.M_free);
  r.M_solved = num_field(q, nm.M_solved);
  for (const auto& row : field(q, nm.L_free))
    r.L_free.push_back({num_field(row, nm.r_free), num_field(row, nm.L_free)});
  for (const auto& row : field(q, nm.L_solved))
    r.L_solved.push_back({num_field(row, nm.r_free), num_field(row, nm.r_solved), num_field(row, nm.L_solved)});

  for (const auto& row : field(j, "region")) {
    RegionRow e;
    e.r_free = num_field(row, nm.r_free);
    e.r_solved = num_field(row, nm.r_solved);
    e.L_free = num_field(row, nm.L_free);
    e.L_solved = num_field(row, nm.L_solved);
    e.margin_1 = num_field(row, "margin_1");
    e.margin_2 = num_field(row, "margin_2");
    const json& pass = field(row, "pass");
    if (!pass.is_boolean()) malformed("field 'pass' is not a boolean");
    e.pass = pass.get<bool>();
    if (row.contains("error")) e.error = row.at("error").get<std::string>();
    r.region.push_back(std::move(e));
  }
  const std::string max_key = std::string(nm.r_free) + "_max";
  const std::string refined_key = std::string(nm.r_free) + "_refined";
  for (const auto& row : field(j, "frontier")) {
    FrontierRow f;
    f.r_solved = num_field(row, nm.r_solved);
    f.r_free_max = opt_from(field(row, max_key.c_str()), max_key.c_str());
    f.r_free_refined = opt_from(field(row, refined_key.c_str()), refined_key.c_str());
    r.frontier.push_back(f);
  }
  return r;
}

json to_json(const ReduceReport& r) {
  json j = json::object();
  j["meta"] = meta_json(r.meta);
  j["decomposition"] = decomposition_json(r.decomposition);
  json points = json::array();
  for (const auto& row : r.rows) {
    json p = {{"alpha", vec(row.alpha)},
              {"lambda", vec(row.lambda)},
              {"g", vec(row.g)},
              {"beta", vec(row.beta)},
              {"iterations", row.iterations},
              {"phi_residual", num(row.phi_residual)},
              {"warnings", row.warnings},
              {"status", row.status}};
    points.push_back(std::move(p));
  }
  j["points"] = std::move(points);
  return j;
}

json to_json(const TraceReport& r) {
  json j = json::object();
  j["meta"] = meta_json(r.meta);
  j["decomposition"] = decomposition_json(r.decomposition);
  json branches = json::array();
  for (const auto& b : r.trace.branches) {
    json pts = json::array();
    for (const auto& p : b.points) {
      pts.push_back({{"lambda", vec(p.lambda)},
                     {"alpha", vec(p.alpha)},
                     {"beta", vec(p.beta)},
                     {"x", vec(p.x)},
                     {"residual_full", num(p.residual_full)},
                     {"residual_reduced", num(p.residual_reduced)},
                     {"degenerate", p.degenerate},
                     {"outside_region", p.outside_region}});
    }
    branches.push_back({{"branch_id", b.id}, {"points", std::move(pts)}});
  }
  j["branches"] = std::move(branches);
  json gaps = json::array();
  for (const auto& g : r.trace.gaps)
    gaps.push_back({{"lambda", num(g.lambda)}, {"alpha", num(g.alpha)}, {"reason", g.reason}});
  j["gaps"] = std::move(gaps);
  if (r.series) {
    j["series"] = {{"g_alpha", num(r.series->g_a)},
                   {"g_alpha_alpha", num(r.series->g_aa)},
                   {"g_alpha_alpha_alpha", num(r.series->g_aaa)},
                   {"g_alpha_lambda", num(r.series->g_al)}};
  } else {
    j["series"] = nullptr;
  }
  if (r.classification) {
    j["classification"] = {{"label", r.classification->label}, {"subtype", r.classification->subtype}};
  } else {
    j["classification"] = nullptr;
  }
  if (!r.series_error.empty()) j["series_error"] = r.series_error;
  return j;
}

std::string render_json(const json& j) { return j.dump(2) + "\n"; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const CertificationReport& r) {
  const Names nm = names_for(r.meta.command);
  std::string out;
  append_meta_rows(out, r.meta);
  if (r.decomposition) append_decomposition_rows(out, *r.decomposition);
  append_row(out, {nm.M_free, format_double(r.M_free)});
  append_row(out, {nm.M_solved, format_double(r.M_solved)});
  out += "\r\n";

  append_row(out, {nm.r_free, nm.r_solved, nm.L_free, nm.L_solved, "margin_1", "margin_2", "pass", "error"});
  for (const auto& e : r.region) {
    append_row(out, {format_double(e.r_free), format_double(e.r_solved), format_double(e.L_free),
                     format_double(e.L_solved), format_double(e.margin_1), format_double(e.margin_2),
                     e.pass ? "true" : "false", e.error});
  }
  out += "\r\n";

  append_row(out, {nm.r_solved, std::string(nm.r_free) + "_max", std::string(nm.r_free) + "_refined"});
  for (const auto& f : r.frontier) {
    append_row(out, {format_double(f.r_solved), f.r_free_max ? format_double(*f.r_free_max) : "",
                     f.r_free_refined ? format_double(*f.r_free_refined) : ""});
  }
  return out;
}

std::string to_csv(const ReduceReport& r) {
  const Eigen::Index q = r.q;
  const Eigen::Index m = r.m;
  const Eigen::Index rank = r.rank;
  std::vector<std::string> header;
  for (auto& h : indexed("alpha", q, true)) header.push_back(h);
  for (auto& h : indexed("lambda", m, true)) header.push_back(h);
  for (auto& h : indexed("g", q, true)) header.push_back(h);
  for (auto& h : indexed("beta", rank, false)) header.push_back(h);
  for (const char* h : {"iterations", "phi_residual", "warnings", "status"}) header.push_back(h);

  std::string out;
  append_row(out, header);
  for (const auto& row : r.rows) {
    std::vector<std::string> fields;
    const bool ok = row.status == "ok";
    append_values(fields, row.alpha, q);
    append_values(fields, row.lambda, m);
    append_values(fields, ok ? row.g : Vector(), q);
    append_values(fields, ok ? row.beta : Vector(), rank);
    fields.push_back(ok ? std::to_string(row.iterations) : "");
    fields.push_back(ok ? format_double(row.phi_residual) : "");
    fields.push_back(join(row.warnings, ";"));
    fields.push_back(row.status);
    append_row(out, fields);
  }
  return out;
}

std::string to_csv(const TraceReport& r) {
  const Eigen::Index n = r.decomposition.n;
  const Eigen::Index rank = r.decomposition.n - r.decomposition.q;
  std::vector<std::string> header = {"branch_id", "lambda", "alpha"};
  for (auto& h : indexed("x", n, false)) header.push_back(h);
  for (auto& h : indexed("beta", rank, false)) header.push_back(h);
  for (const char* h : {"residual_full", "residual_reduced", "status"}) header.push_back(h);

  std::string out;
  append_row(out, header);
  for (const auto& b : r.trace.branches) {
    for (const auto& p : b.points) {
      std::vector<std::string> fields = {std::to_string(b.id), format_double(p.lambda(0)),
                                         format_double(p.alpha(0))};
      append_values(fields, p.x, n);
      append_values(fields, p.beta, rank);
      fields.push_back(format_double(p.residual_full));
      fields.push_back(format_double(p.residual_reduced));
      std::vector<std::string> status;
      if (p.degenerate) status.push_back("degenerate root suspected");
      if (p.outside_region) status.push_back("outside certified region");
      fields.push_back(status.empty() ? "ok" : join(status, ";"));
      append_row(out, fields);
    }
  }
  for (const auto& g : r.trace.gaps) {
    std::vector<std::string> fields = {"", format_double(g.lambda), format_double(g.alpha)};
    for (Eigen::Index i = 0; i < n + rank + 2; ++i) fields.push_back("");
    fields.push_back("gap: " + g.reason);
    append_row(out, fields);
  }
  out += "\r\n";

  append_row(out, {"coefficient", "value"});
  if (r.series) {
    append_row(out, {"g_alpha", format_double(r.series->g_a)});
    append_row(out, {"g_alpha_alpha", format_double(r.series->g_aa)});
    append_row(out, {"g_alpha_alpha_alpha", format_double(r.series->g_aaa)});
    append_row(out, {"g_alpha_lambda", format_double(r.series->g_al)});
  }
  if (r.classification) {
    append_row(out, {"classification", r.classification->label});
    append_row(out, {"subtype", r.classification->subtype});
  }
  if (!r.series_error.empty()) append_row(out, {"series_error", r.series_error});
  return out;
}

}  // namespace lsr
