#include "lsr/run.hpp"

#include <algorithm>
#include <ctime>
#include <map>

#include "lsr/errors.hpp"
#include "lsr/ls_bounds.hpp"
#include "lsr/version.hpp"

namespace lsr {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ReportMeta make_meta(Command command, const RunConfig& cfg, bool timestamp) {
  ReportMeta m;
  m.tool = kToolName;
  m.version = kVersion;
  m.command = command;
  m.norm = cfg.norm;
  const bool analytic = cfg.estimator.mode == SupremumEstimator::Mode::Analytic;
  m.estimator_mode = analytic ? "analytic" : "sampled";
  m.rigorous = analytic;
  m.samples_per_dim = cfg.estimator.samples_per_dim;
  m.safety_factor = cfg.estimator.safety_factor;
  m.config = cfg.source;
  if (timestamp) m.timestamp = utc_timestamp();
  return m;
}

void add_estimator_notes(ReportMeta& m) {
  if (!m.rigorous) {
    m.notes.push_back("L values are maxima over a finite sample of each ball and may underestimate the "
                      "true suprema; the certificate is not rigorous");
  } else {
    m.notes.push_back("L values come from user-supplied closed forms; rigour rests on those bounds");
  }
  m.notes.push_back("suprema are taken over closed balls (boundary points included)");
  m.notes.push_back("both inequalities are strict: an entry with a margin <= 0 fails");
}

[[noreturn]] void missing_block(const char* block, Command c) {
  fail(ErrorCode::ConfigError,
       std::string("config.") + block + ": required for " + command_name(c));
}

template <class Entry, class FreeR, class SolvedR, class FreeL, class SolvedL>
void fill_tables(CertificationReport& r, const std::vector<Entry>& entries, FreeR free_r,
                 SolvedR solved_r, FreeL free_l, SolvedL solved_l) {
  std::vector<double> seen;
  for (const auto& e : entries) {
    if (!e.error.empty()) continue;
    if (std::find(seen.begin(), seen.end(), free_r(e)) == seen.end()) {
      seen.push_back(free_r(e));
      r.L_free.push_back({free_r(e), free_l(e)});
    }
    r.L_solved.push_back({free_r(e), solved_r(e), solved_l(e)});
  }
}

SplitSystem split_system_for(const RunConfig& cfg, const ParametricSystem& sys) {
  const EvaluationPoint pt = make_point(sys, cfg.x0, cfg.lambda0);
  return build_split_system(sys, pt, cfg.rank_tol, cfg.equilibrium_tol, cfg.par_weights);
}

void note_base_refinement(ReportMeta& m, const RunConfig& cfg, const SplitSystem& ss) {
  if (ss.base().x0 != cfg.x0)
    m.notes.push_back("base point state refined by Newton to reach the equilibrium tolerance");
}

std::optional<CertifiedRegion> region_for(const RunConfig& cfg, const SplitSystem& ss) {
  if (!cfg.certify) return std::nullopt;
  const SupremumEstimator est = build_ls_estimator(cfg);
  return certify_ls_region(ss, cfg.certify->r_par, cfg.certify->r_perp, est, cfg.norm,
                           OnEntryError::Record);
}

}  // namespace

CertificationReport run_ls_certify(const RunConfig& cfg, bool timestamp) {
  if (!cfg.certify) missing_block("certify", Command::LsCertify);
  const SupremumEstimator est = build_ls_estimator(cfg);
  const ParametricSystem sys = build_system(cfg);
  const SplitSystem ss = split_system_for(cfg, sys);
  const LsBoundQuantities q = make_ls_quantities(ss, est, cfg.norm);
  const CertifiedRegion region =
      certify_ls_region(q, cfg.certify->r_par, cfg.certify->r_perp, OnEntryError::Record);

  CertificationReport r;
  r.meta = make_meta(Command::LsCertify, cfg, timestamp);
  add_estimator_notes(r.meta);
  note_base_refinement(r.meta, cfg, ss);
  if (!cfg.par_weights.empty())
    r.meta.notes.push_back("r_par is measured in weighted (alpha, lambda) coordinates");
  r.decomposition = summarize(ss.decomposition(), ss.base().x0, ss.base().lambda0, ss.base().residual);
  r.M_free = q.M_par;
  r.M_solved = q.M_perp;
  fill_tables(
      r, region.entries, [](const CertifiedEntry& e) { return e.r_par; },
      [](const CertifiedEntry& e) { return e.r_perp; }, [](const CertifiedEntry& e) { return e.L_par; },
      [](const CertifiedEntry& e) { return e.L_perp; });
  for (const auto& e : region.entries)
    r.region.push_back({e.r_par, e.r_perp, e.L_par, e.L_perp, e.margin_1, e.margin_2, e.pass, e.error});
  for (const auto& f : region.frontier) r.frontier.push_back({f.r_perp, f.r_par_max, f.r_par_refined});
  return r;
}

CertificationReport run_imft_certify(const RunConfig& cfg, bool timestamp) {
  if (!cfg.imft) missing_block("imft", Command::ImftCertify);
  const ImftTask& task = *cfg.imft;
  const SupremumEstimator est = build_imft_estimator(cfg);
  const ParametricSystem sys = build_system(cfg);
  const int n = sys.n();
  const int m = sys.m();

  const expr::Variables vars = expr::state_and_parameters(n, m);
  std::map<std::string, int> slot;
  for (int i = 0; i < vars.size(); ++i) slot[vars.names[static_cast<std::size_t>(i)]] = i;
  std::vector<int> used(static_cast<std::size_t>(n + m), 0);
  auto resolve = [&](const std::vector<std::string>& names, const char* key) {
    std::vector<int> out;
    for (const auto& name : names) {
      const auto it = slot.find(name);
      if (it == slot.end())
        fail(ErrorCode::ConfigError, std::string("config.imft.split.") + key + ": unknown variable '" +
                                         name + "' (expected x1..x" + std::to_string(n) +
                                         (m ? ", l1..l" + std::to_string(m) : std::string()) + ")");
      if (used[static_cast<std::size_t>(it->second)]++)
        fail(ErrorCode::ConfigError, std::string("config.imft.split.") + key + ": variable '" + name +
                                         "' is listed more than once");
      out.push_back(it->second);
    }
    return out;
  };
  const std::vector<int> xs = resolve(task.x_vars, "x");
  const std::vector<int> ys = resolve(task.y_vars, "y");
  if (static_cast<int>(ys.size()) != n)
    fail(ErrorCode::ConfigError, "config.imft.split.y: needs exactly " + std::to_string(n) +
                                     " variables, one per equation");
  if (static_cast<int>(xs.size()) != m)
    fail(ErrorCode::ConfigError, "config.imft.split.x: every variable must appear in x or y");

  Vector z0(n + m);
  z0 << cfg.x0, cfg.lambda0;
  const auto scatter = [n, m, xs, ys](const Vector& x, const Vector& y) {
    Vector z(n + m);
    for (std::size_t i = 0; i < xs.size(); ++i) z(xs[i]) = x(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < ys.size(); ++i) z(ys[i]) = y(static_cast<Eigen::Index>(i));
    return std::make_pair(Vector(z.head(n)), Vector(z.tail(m)));
  };
  const auto gather = [](const Vector& z, const std::vector<int>& idx) {
    Vector v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) v(static_cast<Eigen::Index>(i)) = z(idx[i]);
    return v;
  };

  SplitMap f;
  f.nx = m;
  f.ny = n;
  f.eval = [sys, scatter](const Vector& x, const Vector& y) {
    const auto [state, lambda] = scatter(x, y);
    return sys.eval(state, lambda);
  };
  f.jacobians = [sys, scatter, xs, ys, n, m](const Vector& x, const Vector& y) {
    const auto [state, lambda] = scatter(x, y);
    const Jacobians j = sys.jacobians(state, lambda);
    Matrix full(n, n + m);
    full << j.dx, j.dlambda;
    PartialJacobians p{Matrix(n, m), Matrix(n, n)};
    for (std::size_t i = 0; i < xs.size(); ++i) p.dx.col(static_cast<Eigen::Index>(i)) = full.col(xs[i]);
    for (std::size_t i = 0; i < ys.size(); ++i) p.dy.col(static_cast<Eigen::Index>(i)) = full.col(ys[i]);
    return p;
  };

  const Vector x0 = gather(z0, xs);
  const Vector y0 = gather(z0, ys);
  const double residual = vector_norm(f.eval(x0, y0), NormKind::Spectral);
  if (!(residual <= cfg.equilibrium_tol))
    fail(ErrorCode::NotEquilibrium, "f(x0, y0) has norm " + format_double(residual) +
                                        ", above the equilibrium tolerance");

  const ImftQuantities q = make_quantities(f, x0, y0, est, cfg.norm);
  const auto entries = certify_region(q, task.r_x, task.r_y, OnEntryError::Record);

  CertificationReport r;
  r.meta = make_meta(Command::ImftCertify, cfg, timestamp);
  add_estimator_notes(r.meta);
  r.M_free = q.M_x;
  r.M_solved = q.M_y;
  fill_tables(
      r, entries, [](const ImftRegionEntry& e) { return e.r_x; },
      [](const ImftRegionEntry& e) { return e.r_y; }, [](const ImftRegionEntry& e) { return e.L_x; },
      [](const ImftRegionEntry& e) { return e.L_y; });
  for (const auto& e : entries)
    r.region.push_back({e.r_x, e.r_y, e.L_x, e.L_y, e.verdict.margin_1, e.verdict.margin_2,
                        e.verdict.pass, e.error});

  std::vector<double> sorted_x = task.r_x;
  std::sort(sorted_x.begin(), sorted_x.end());
  for (std::size_t j = 0; j < task.r_y.size(); ++j) {
    FrontierRow fr;
    fr.r_solved = task.r_y[j];
    for (std::size_t i = 0; i < task.r_x.size(); ++i) {
      const auto& e = entries[i * task.r_y.size() + j];
      if (e.verdict.pass && (!fr.r_free_max || e.r_x > *fr.r_free_max)) fr.r_free_max = e.r_x;
    }
    if (fr.r_free_max) {
      fr.r_free_refined = fr.r_free_max;
      const auto next = std::upper_bound(sorted_x.begin(), sorted_x.end(), *fr.r_free_max);
      if (next != sorted_x.end()) {
        const double mid = 0.5 * (*fr.r_free_max + *next);
        try {
          if (check_conditions(q, mid, fr.r_solved).pass) fr.r_free_refined = mid;
        } catch (const Error&) {
        }
      }
    }
    r.frontier.push_back(fr);
  }
  return r;
}

ReduceReport run_reduce(const RunConfig& cfg, bool timestamp) {
  if (!cfg.reduce) missing_block("reduce", Command::Reduce);
  const ParametricSystem sys = build_system(cfg);
  const SplitSystem ss = split_system_for(cfg, sys);
  for (std::size_t i = 0; i < cfg.reduce->points.size(); ++i) {
    const auto& p = cfg.reduce->points[i];
    if (p.alpha.size() != ss.q() || p.lambda.size() != ss.m())
      fail(ErrorCode::ConfigError,
           "config.reduce: point " + std::to_string(i) + " needs alpha of length q = " +
               std::to_string(ss.q()) + " and lambda of length m = " + std::to_string(ss.m()));
  }
  const ReducedMap rm(ss, cfg.newton, region_for(cfg, ss), cfg.norm);

  ReduceReport r;
  r.meta = make_meta(Command::Reduce, cfg, timestamp);
  note_base_refinement(r.meta, cfg, ss);
  if (rm.region()) add_estimator_notes(r.meta);
  r.decomposition = summarize(ss.decomposition(), ss.base().x0, ss.base().lambda0, ss.base().residual);
  r.q = ss.q();
  r.m = ss.m();
  r.rank = ss.rank();
  for (const auto& p : cfg.reduce->points) {
    ReduceRow row;
    row.alpha = p.alpha;
    row.lambda = p.lambda;
    try {
      const ReducedValue v = reduced_residual(rm, p.alpha, p.lambda);
      row.g = v.g;
      row.beta = v.phi.beta;
      row.iterations = v.phi.iterations;
      row.phi_residual = v.phi.residual;
      if (v.phi.outside_region) row.warnings.push_back("outside certified region");
      row.status = "ok";
    } catch (const Error& e) {
      row.status = e.what();
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

TraceReport run_trace(const RunConfig& cfg, bool timestamp) {
  if (!cfg.trace) missing_block("trace", Command::Trace);
  const ParametricSystem sys = build_system(cfg);
  const SplitSystem ss = split_system_for(cfg, sys);
  if (ss.q() != 1 || ss.m() != 1)
    fail(ErrorCode::UnsupportedDimensions, "trace needs q = 1 and m = 1, got q = " +
                                               std::to_string(ss.q()) + ", m = " + std::to_string(ss.m()));
  const ReducedMap rm(ss, cfg.newton, region_for(cfg, ss), cfg.norm);

  TraceReport r;
  r.meta = make_meta(Command::Trace, cfg, timestamp);
  note_base_refinement(r.meta, cfg, ss);
  if (rm.region()) add_estimator_notes(r.meta);
  r.decomposition = summarize(ss.decomposition(), ss.base().x0, ss.base().lambda0, ss.base().residual);
  r.trace = trace_branches(rm, *cfg.trace);
  try {
    r.series = series_coefficients(rm);
    r.classification = classify(*r.series);
  } catch (const Error& e) {
    r.series_error = e.what();
  }
  return r;
}

RunOutcome run(Command command, const RunConfig& cfg, const RunOptions& opts) {
  RunOutcome out;
  out.output_path = cfg.output.path;
  const bool certify = command == Command::LsCertify || command == Command::ImftCertify;
  if (opts.format) {
    out.format = *opts.format;
  } else if (cfg.output.format) {
    out.format = *cfg.output.format == "csv" ? Format::Csv : Format::Json;
  } else {
    out.format = certify ? Format::Json : Format::Csv;
  }
  const bool json = out.format == Format::Json;

  switch (command) {
    case Command::LsCertify:
    case Command::ImftCertify: {
      const CertificationReport r = command == Command::LsCertify ? run_ls_certify(cfg, opts.timestamp)
                                                                  : run_imft_certify(cfg, opts.timestamp);
      out.text = json ? render_json(to_json(r)) : to_csv(r);
      out.exit_code = r.any_pass() ? 0 : 2;
      break;
    }
    case Command::Reduce: {
      const ReduceReport r = run_reduce(cfg, opts.timestamp);
      out.text = json ? render_json(to_json(r)) : to_csv(r);
      const bool any_ok = std::any_of(r.rows.begin(), r.rows.end(),
                                      [](const ReduceRow& row) { return row.status == "ok"; });
      out.exit_code = any_ok ? 0 : 2;
      break;
    }
    case Command::Trace: {
      const TraceReport r = run_trace(cfg, opts.timestamp);
      out.text = json ? render_json(to_json(r)) : to_csv(r);
      const bool any_point = std::any_of(r.trace.branches.begin(), r.trace.branches.end(),
                                         [](const Branch& b) { return !b.points.empty(); });
      out.exit_code = any_point ? 0 : 2;
      break;
    }
  }
  return out;
}

}  // namespace lsr
