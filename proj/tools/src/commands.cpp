#include <algorithm>
#include <cmath>
#include <limits>

#include "algcalc/cli.hpp"
#include "json_emit.hpp"

namespace algcalc::cli {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ojson point_json(const Point& p) {
  ojson o;
  o["x"] = p.x;
  o["y"] = p.y;
  return o;
}

ojson residual_json(const Residual& r, bool with_verdict = true) {
  ojson o;
  o["name"] = r.name;
  o["max"] = r.max;
  o["argmax"] = r.argmax ? point_json(*r.argmax) : ojson(nullptr);
  if (with_verdict) {
    o["tolerance"] = r.tolerance;
    o["pass"] = r.pass;
  }
  return o;
}

Residual scalar_residual(std::string name, double value, double tol) {
  Residual r;
  r.name = std::move(name);
  r.max = value;
  r.tolerance = tol;
  r.pass = !std::isnan(value) && within(value, tol);
  return r;
}

struct Run {
  const GeometryConfig& cfg;
  const RunOptions& opt;
  Tolerances tol;
  unsigned threads = 1;
  SampleSpec spec;
  std::vector<Point> pts;
  std::vector<Point> probes;
  ValidationReport checks;
  ojson extra = ojson::object();
  ojson samples = ojson::array();

  Run(const GeometryConfig& c, const RunOptions& o) : cfg(c), opt(o), tol(c.tol), spec(c.sampling) {
    if (o.tol) tol.set_all(*o.tol);
    threads = o.threads ? *o.threads : c.threads;
    if (o.seed) spec.seed = *o.seed;
    if (o.points) spec.count = *o.points;
    probes = o.probes ? *o.probes : c.probes;
    for (const auto& p : probes) check_point(c.dims(), p);
    pts = generate(spec).points;
  }

  // Appends residuals under a prefix.
  void add(const ValidationReport& r, const std::string& prefix = "") {
    for (auto x : r.residuals) {
      if (!prefix.empty()) x.name = prefix + "." + x.name;
      checks.add(std::move(x));
    }
  }

  // max over points of max_i |a_i - b_i|.
  template <class FA, class FB>
  Residual diff(std::string name, FA&& a, FB&& b, double tolerance) {
    const auto per = parallel_map(pts.size(), threads, [&](std::size_t i) {
      const auto u = a(pts[i]), v = b(pts[i]);
      double w = 0;
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double d = std::fabs(u[k] - v[k]);
        w = std::isnan(d) ? d : std::max(w, d);
        if (std::isnan(w)) break;
      }
      return w;
    });
    return make_residual(std::move(name), per, pts, tolerance);
  }
};

std::vector<double> vals(const std::vector<Jet>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.value());
  return out;
}


[[noreturn]] void need_metric() {
  throw ConfigError(ErrorCode::ShapeError, "metric", "this command needs one of metric, lagrangian or finsler");
}

MetricStructure metric_of(const Run& R) {
  const auto& c = R.cfg;
  if (c.metric) return MetricStructure(c.p, c.r, c.metric->h, c.metric->v, c.metric->h_riemannian, c.metric->v_riemannian);
  if (c.fundamental) {
    if (c.p != c.r) throw ConfigError(ErrorCode::DimensionMismatch, "dims", "a Lagrange or Finsler metric needs p = r");
    return build_gl_space(hessian_metric(*c.fundamental), c.r, R.pts);
  }
  need_metric();
}

// The fiber block g_ab used by the normal (p = r) constructions.
FieldArray fiber_metric(const Run& R) {
  const auto& c = R.cfg;
  if (c.p != c.r) throw ConfigError(ErrorCode::DimensionMismatch, "dims", "normal d-connections need p = r");
  if (c.fundamental) return hessian_metric(*c.fundamental);
  if (c.metric) return symmetric_array(c.metric->v, c.r);
  need_metric();
}

DConnection base_of(const GeometryConfig& c) {
  switch (c.base.kind) {
    case BaseKind::zero:
      return DConnection::zero(c.connection);
    case BaseKind::blocks:
      return DConnection::from_blocks(c.connection, c.base.hh, c.base.hv, c.base.vh, c.base.vv);
    case BaseKind::berwald:
      break;
  }
  return c.p == c.r ? berwald(c.connection) : berwald_base(c.connection);
}

ObataTensors obata_of(const GeometryConfig& c) {
  if (c.obata) return *c.obata;
  const Dims d = c.dims();
  const std::size_t p = c.p, r = c.r;
  return {std::vector<ScalarField>(p * p * p, ScalarField::zero(d)), std::vector<ScalarField>(p * p * r, ScalarField::zero(d)),
          std::vector<ScalarField>(r * r * p, ScalarField::zero(d)), std::vector<ScalarField>(r * r * r, ScalarField::zero(d))};
}

TorsionPair torsions_of(const GeometryConfig& c) {
  if (c.torsions) return *c.torsions;
  const std::size_t n = static_cast<std::size_t>(c.r) * c.r * c.r;
  return {std::vector<ScalarField>(n, ScalarField::zero(c.dims())), std::vector<ScalarField>(n, ScalarField::zero(c.dims()))};
}

ObataConvention obata_convention(const RunOptions& o) {
  if (o.convention.empty() || o.convention == "compatible") return ObataConvention::compatible;
  if (o.convention == "swapped") return ObataConvention::swapped;
  throw ConfigError(ErrorCode::ShapeError, "--convention", "obata accepts compatible or swapped");
}

TorsionConvention torsion_convention(const RunOptions& o) {
  if (o.convention.empty() || o.convention == "plus-structure") return TorsionConvention::plus_structure;
  if (o.convention == "minus-structure") return TorsionConvention::minus_structure;
  throw ConfigError(ErrorCode::ShapeError, "--convention", "torsion recovery accepts plus-structure or minus-structure");
}

// Nested array view of a flat block with extents (n0, n1, n2) starting at `offset`.
ojson block_json(const std::vector<double>& v, std::size_t offset, int n0, int n1, int n2) {
  ojson out = ojson::array();
  for (int a = 0; a < n0; ++a) {
    ojson mid = ojson::array();
    for (int b = 0; b < n1; ++b) {
      ojson row = ojson::array();
      for (int c = 0; c < n2; ++c) row.push_back(v[offset + (static_cast<std::size_t>(a) * n1 + b) * n2 + c]);
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

struct BlockShape {
  const char* name;
  std::size_t offset;
  int n0, n1, n2;
};

std::vector<BlockShape> shapes_of(const DConnectionLayout& L) {
  return {{"Hh", 0, L.p, L.p, L.p}, {"Hv", L.hv0(), L.r, L.r, L.p}, {"Vh", L.vh0(), L.p, L.p, L.r}, {"Vv", L.vv0(), L.r, L.r, L.r}};
}

std::vector<BlockShape> shapes_of_normal(int r) {
  return {{"H", 0, r, r, r}, {"V", static_cast<std::size_t>(r) * r * r, r, r, r}};
}

// Tables at the probes, max |coefficient| per block over the samples, optional sample dump.
ojson connection_section(Run& R, const std::string& kind, const FieldArray& blocks, const std::vector<BlockShape>& shapes) {
  ojson sec;
  sec["kind"] = kind;
  ojson tables = ojson::array();
  for (const auto& pr : R.probes) {
    const auto v = vals(blocks.eval(pr, 0));
    ojson t;
    t["probe"] = point_json(pr);
    for (const auto& s : shapes) t[s.name] = block_json(v, s.offset, s.n0, s.n1, s.n2);
    tables.push_back(std::move(t));
  }
  sec["tables"] = std::move(tables);
  const auto at_pts = parallel_map(R.pts.size(), R.threads, [&](std::size_t i) { return vals(blocks.eval(R.pts[i], 0)); });
  ojson summary = ojson::array();
  for (const auto& s : shapes) {
    const std::size_t n = static_cast<std::size_t>(s.n0) * s.n1 * s.n2;
    std::vector<double> per(R.pts.size(), 0.0);
    for (std::size_t i = 0; i < R.pts.size(); ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const double a = std::fabs(at_pts[i][s.offset + k]);
        per[i] = std::isnan(a) ? a : std::max(per[i], a);
        if (std::isnan(per[i])) break;
      }
    summary.push_back(residual_json(make_residual(std::string(s.name) + ".max_abs", per, R.pts, kInf), false));
  }
  sec["summary"] = std::move(summary);
  if (R.opt.dump_samples) {
    ojson dump = ojson::array();
    for (std::size_t i = 0; i < R.pts.size(); ++i) {
      ojson e;
      e["point"] = point_json(R.pts[i]);
      e["coefficients"] = at_pts[i];
      dump.push_back(std::move(e));
    }
    sec["samples"] = std::move(dump);
  }
  return sec;
}

void metrizability_checks(Run& R, const DConnection& D, const MetricStructure& G, const std::string& prefix) {
  R.add(metrizability_residual(D, G, R.pts, R.tol.metrizability, R.threads), prefix);
}

void recovered_torsion_check(Run& R, const NormalDConnection& N, const TorsionPair* expected, TorsionConvention conv) {
  const std::size_t n3 = static_cast<std::size_t>(N.r()) * N.r() * N.r();
  auto got = [&](const Point& p) { return recovered_torsions_at(N, p, conv); };
  auto want = [&](const Point& p) {
    std::vector<double> v(2 * n3, 0.0);
    if (expected)
      for (std::size_t i = 0; i < n3; ++i) {
        v[i] = expected->T[i].value(p);
        v[n3 + i] = expected->S[i].value(p);
      }
    return v;
  };
  if (expected)
    R.checks.add(R.diff("torsion.roundtrip", got, want, R.tol.roundtrip));
  else
    R.checks.add(R.diff("torsion.recovered", got, want, R.tol.torsion));
}

void cmd_connection(Run& R, const std::string& kind) {
  const auto& c = R.cfg;
  if (kind == "berwald") {
    const DConnection B = c.p == c.r ? berwald(c.connection) : berwald_base(c.connection);
    R.extra["connection"] = connection_section(R, kind, B.blocks(), shapes_of(B.layout()));
  } else if (kind == "canonical" || kind == "obata" || kind == "base-deform") {
    const MetricStructure G = metric_of(R);
    const DConnection D = kind == "canonical" ? canonical_dconnection(G, base_of(c))
                          : kind == "obata"   ? obata_deform(G, obata_of(c), c.connection, obata_convention(R.opt))
                                              : base_deform(G, base_of(c));
    metrizability_checks(R, D, G, kind);
    R.extra["connection"] = connection_section(R, kind, D.blocks(), shapes_of(D.layout()));
  } else if (kind == "levi-civita" || kind == "torsion-deform") {
    const FieldArray g = fiber_metric(R);
    const MetricStructure G = build_gl_space(g, c.r, R.pts);
    const TorsionConvention conv = torsion_convention(R.opt);
    NormalDConnection N = levi_civita_normal(c.connection, g);
    TorsionPair TS;
    if (kind == "torsion-deform") {
      TS = torsions_of(c);
      N = torsion_deform(N, g, TS);
    }
    metrizability_checks(R, N.to_dconnection(), G, kind);
    recovered_torsion_check(R, N, kind == "torsion-deform" ? &TS : nullptr, conv);
    R.extra["connection"] = connection_section(R, kind, N.blocks(), shapes_of_normal(c.r));
  } else {
    throw ConfigError(ErrorCode::ShapeError, "connection", "unknown kind '" + kind + "'");
  }
}

void cmd_check_structure(Run& R) {
  const auto& A = *R.cfg.algebroid;
  R.add(validate_structure(A, R.pts, R.tol.structure, R.threads));
  R.checks.add(scalar_residual("algebroid.jacobi", jacobi_residual(A, R.pts, R.threads), R.tol.structure));
  const auto dual = parallel_map(R.pts.size(), R.threads, [&](std::size_t i) { return duality_residual(*R.cfg.connection, R.pts[i]); });
  R.checks.add(make_residual("nlconn.duality", dual, R.pts, R.tol.structure));
}

void cmd_metrizability(Run& R) {
  const auto& c = R.cfg;
  const MetricStructure G = metric_of(R);
  R.add(validate_metric(G, R.pts, R.tol.metric, R.threads));
  metrizability_checks(R, canonical_dconnection(G, base_of(c)), G, "canonical");
  metrizability_checks(R, berwald_canonical(G, c.connection), G, "berwald-canonical");
  if (c.obata) metrizability_checks(R, obata_deform(G, *c.obata, c.connection, obata_convention(R.opt)), G, "obata");
  metrizability_checks(R, base_deform(G, base_of(c)), G, "base-deform");
}

void cmd_finsler(Run& R) {
  const auto& c = R.cfg;
  if (!c.fundamental) throw ConfigError(ErrorCode::ShapeError, "finsler", "finsler-check needs a finsler or lagrangian function");
  const FieldArray g = hessian_metric(*c.fundamental);
  R.add(regularity_check(g, c.r, R.pts, R.threads));
  if (c.fundamental->kind == FundamentalKind::Finsler) {
    R.add(finsler_checks(c.fundamental->f, R.pts, c.lambdas, {R.tol.homogeneity, R.tol.euler}, R.threads));
    R.checks.add(scalar_residual("finsler.euler_metric", euler_metric_residual(c.fundamental->f, R.pts), R.tol.hessian));
  }
}

void cmd_transform(Run& R) {
  const auto& c = R.cfg;
  if (!c.frame_change) throw ConfigError(ErrorCode::ShapeError, "frame_change", "transform-check needs a frame_change");
  const FrameChange& F = *c.frame_change;
  const FrameChange inv = F.inverse();
  R.add(validate_frame_change(F, R.pts, R.tol.roundtrip, R.threads));
  const NonlinearConnection& C = *c.connection;
  const NonlinearConnection back = transform_gamma(transform_gamma(C, F), inv);
  const auto& A = C.algebroid();
  const auto& A2 = back.algebroid();
  auto rho = [](const GeneralizedAlgebroid& X) { return [&X](const Point& p) { return vals(X.rho().eval(p, 0)); }; };
  auto L = [](const GeneralizedAlgebroid& X) { return [&X](const Point& p) { return vals(X.L().eval(p, 0)); }; };
  auto gam = [](const NonlinearConnection& X) { return [&X](const Point& p) { return vals(X.gamma().eval(p, 0)); }; };
  R.checks.add(R.diff("transform.anchor_roundtrip", rho(A), rho(A2), R.tol.roundtrip));
  R.checks.add(R.diff("transform.structure_roundtrip", L(A), L(A2), R.tol.roundtrip));
  R.checks.add(R.diff("transform.gamma_roundtrip", gam(C), gam(back), R.tol.roundtrip));
  const DConnection D = base_of(c);
  const DConnection Dback = transform_dconnection(transform_dconnection(D, F), inv);
  auto dc = [](const DConnection& X) { return [&X](const Point& p) { return vals(X.eval(p, 0)); }; };
  R.checks.add(R.diff("transform.dconnection_roundtrip", dc(D), dc(Dback), R.tol.roundtrip));
  const FrameChange I = identity_frame_change(c.m, c.p, c.r);
  const NonlinearConnection Cid = transform_gamma(C, I);
  const DConnection Did = transform_dconnection(D, I);
  R.checks.add(R.diff("transform.identity_gamma", gam(C), gam(Cid), 0.0));
  R.checks.add(R.diff("transform.identity_dconnection", dc(D), dc(Did), 0.0));
}

void cmd_report(Run& R) {
  const auto& c = R.cfg;
  cmd_check_structure(R);
  // A fundamental function with a singular Hessian fails here; the metric sections are skipped.
  bool regular = true;
  if (c.fundamental) {
    cmd_finsler(R);
    regular = R.checks.find("lagrange.rank_deficit")->pass;
  }
  const bool metric = c.metric || (c.fundamental && regular);
  if (metric) cmd_metrizability(R);
  if (c.frame_change) cmd_transform(R);
  ojson conns = ojson::array();
  auto keep = [&](const std::string& kind) {
    cmd_connection(R, kind);
    conns.push_back(R.extra["connection"]);
    R.extra.erase("connection");
  };
  keep(metric ? "canonical" : "berwald");
  if (c.fundamental && regular && c.p == c.r) keep(c.torsions ? "torsion-deform" : "levi-civita");
  R.extra["connections"] = std::move(conns);
}

ojson header(const std::string& command, const std::string& kind, const std::string& source) {
  ojson o;
  o["schema"] = kReportSchema;
  o["command"] = command;
  if (command == "connection") o["kind"] = kind;
  o["config"] = source;
  return o;
}

CommandResult failure(ojson o, const Error& e) {
  ojson err;
  err["code"] = error_code_name(e.code());
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) err["field"] = ce->field();
  err["message"] = e.what();
  o["error"] = std::move(err);
  o["pass"] = false;
  o["exit_code"] = 2;
  CommandResult res;
  res.exit_code = 2;
  res.report = emit_json(o);
  res.diagnostic = std::string("error: ") + error_code_name(e.code()) + ": " + e.what();
  return res;
}

}  // namespace

CommandResult run_command(const std::string& command, const std::string& kind, const GeometryConfig& config,
                          const RunOptions& options) {
  ojson o = header(command, kind, config.source);
  try {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
      throw ConfigError(ErrorCode::ShapeError, "command", "unknown command '" + command + "'");
    Run R(config, options);
    if (command == "check-structure") {
      cmd_check_structure(R);
    } else if (command == "connection") {
      cmd_connection(R, kind);
    } else if (command == "metrizability") {
      cmd_metrizability(R);
    } else if (command == "finsler-check") {
      cmd_finsler(R);
    } else if (command == "transform-check") {
      cmd_transform(R);
    } else {
      cmd_report(R);
    }
    ojson dims;
    dims["m"] = config.m;
    dims["p"] = config.p;
    dims["r"] = config.r;
    o["dims"] = std::move(dims);
    ojson s;
    s["seed"] = R.spec.seed;
    s["count"] = R.spec.count;
    s["points"] = R.pts.size();
    ojson xb = ojson::array(), yb = ojson::array();
    for (const auto& b : R.spec.x_box) xb.push_back({b.lo, b.hi});
    for (const auto& b : R.spec.y_box) yb.push_back({b.lo, b.hi});
    s["x_box"] = std::move(xb);
    s["y_box"] = std::move(yb);
    s["exclude_zero_section"] = R.spec.exclude_zero_section;
    s["fiber_floor"] = R.spec.fiber_floor;
    o["sampling"] = std::move(s);
    ojson checks = ojson::array();
    for (const auto& r : R.checks.residuals) checks.push_back(residual_json(r));
    o["checks"] = std::move(checks);
    for (auto it = R.extra.begin(); it != R.extra.end(); ++it) o[it.key()] = it.value();
    if (options.dump_samples) {
      ojson pts = ojson::array();
      for (const auto& p : R.pts) pts.push_back(point_json(p));
      o["samples"] = std::move(pts);
    }
    const bool pass = R.checks.pass();
    o["pass"] = pass;
    o["exit_code"] = pass ? 0 : 1;
    CommandResult res;
    res.exit_code = pass ? 0 : 1;
    res.report = emit_json(o);
    return res;
  } catch (const Error& e) {
    return failure(std::move(o), e);
  }
}

CommandResult run_file(const std::string& command, const std::string& kind, const std::string& path,
                       const RunOptions& options) {
  GeometryConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const Error& e) {
    const auto slash = path.find_last_of("/\\");
    return failure(header(command, kind, slash == std::string::npos ? path : path.substr(slash + 1)), e);
  }
  return run_command(command, kind, cfg, options);
}

}  // namespace algcalc::cli
