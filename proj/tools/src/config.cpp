#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "algcalc/cli.hpp"
#include "algcalc/expr.hpp"
#include "json.hpp"

namespace algcalc::cli {

using nlohmann::json;

void Tolerances::set_all(double t) {
  structure = metric = metrizability = roundtrip = torsion = homogeneity = euler = hessian = t;
}

namespace {

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string dot(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void shape(const std::string& path, const std::string& what) {
  throw ConfigError(ErrorCode::ShapeError, path, what);
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
  if (!j.is_object()) shape(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) shape(dot(path, k), "unknown field");
}

const json& array_of(const json& j, const std::string& path, std::size_t n) {
  if (!j.is_array()) shape(path, "expected an array of " + std::to_string(n));
  if (j.size() != n) shape(path, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  return j;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) shape(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) shape(path, "expected an integer");
  return j.get<int>();
}

bool boolean(const json& j, const std::string& path) {
  if (!j.is_boolean()) shape(path, "expected true or false");
  return j.get<bool>();
}

ScalarField expr(const json& j, const std::string& path, Dims d) {
  std::string src;
  if (j.is_string()) {
    src = j.get<std::string>();
  } else if (j.is_number()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
    src = buf;
  } else {
    shape(path, "expected an expression string");
  }
  try {
    return parse_field(src, d);
  } catch (const Error& e) {
    throw ConfigError(e.code(), path, e.what());
  }
}

std::vector<ScalarField> vec(const json& j, const std::string& path, std::size_t n, Dims d) {
  array_of(j, path, n);
  std::vector<ScalarField> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(expr(j[i], at(path, i), d));
  return out;
}

// Row-major flattening of nested arrays with the given extents; "zero" gives all zeros.
std::vector<ScalarField> tensor(const json& j, const std::string& path, std::vector<std::size_t> ext, Dims d) {
  std::size_t total = 1;
  for (auto e : ext) total *= e;
  if (j.is_string() && j.get<std::string>() == "zero") return std::vector<ScalarField>(total, ScalarField::zero(d));
  std::vector<ScalarField> out;
  out.reserve(total);
  auto walk = [&](auto&& self, const json& node, const std::string& p, std::size_t level) -> void {
    if (level + 1 == ext.size()) {
      auto v = vec(node, p, ext[level], d);
      out.insert(out.end(), v.begin(), v.end());
      return;
    }
    array_of(node, p, ext[level]);
    for (std::size_t i = 0; i < ext[level]; ++i) self(self, node[i], at(p, i), level + 1);
  };
  if (ext.empty() || total == 0) return out;
  walk(walk, j, path, 0);
  return out;
}

std::vector<ScalarField> identity(int n, Dims d) {
  std::vector<ScalarField> out;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) out.push_back(ScalarField::constant(d, i == k ? 1.0 : 0.0));
  return out;
}

std::vector<Interval> box(const json& j, const std::string& path, int n) {
  array_of(j, path, n);
  std::vector<Interval> out;
  for (int i = 0; i < n; ++i) {
    const std::string p = at(path, i);
    array_of(j[i], p, 2);
    out.push_back({number(j[i][0], at(p, 0)), number(j[i][1], at(p, 1))});
  }
  return out;
}

Point point(const json& j, const std::string& path, int m, int r) {
  allow_keys(j, path, {"x", "y"});
  if (!j.contains("x") || !j.contains("y")) shape(path, "a point needs x and y");
  Point pt;
  array_of(j["x"], dot(path, "x"), m);
  array_of(j["y"], dot(path, "y"), r);
  for (int i = 0; i < m; ++i) pt.x.push_back(number(j["x"][i], at(dot(path, "x"), i)));
  for (int a = 0; a < r; ++a) pt.y.push_back(number(j["y"][a], at(dot(path, "y"), a)));
  return pt;
}

std::size_t u(int n) { return static_cast<std::size_t>(n); }

}  // namespace

Point parse_probe(std::string_view text, int m, int r) {
  std::vector<double> v;
  std::string item;
  std::stringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double d = 0;
    try {
      d = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError(ErrorCode::ParseError, "--probe", "not a number: '" + item + "'");
    v.push_back(d);
  }
  if (v.size() != u(m + r))
    throw ConfigError(ErrorCode::DimensionMismatch, "--probe",
                      "expected " + std::to_string(m + r) + " coordinates, got " + std::to_string(v.size()));
  return {{v.begin(), v.begin() + m}, {v.begin() + m, v.end()}};
}

GeometryConfig parse_config(std::string_view text, std::string source) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "", {"schema", "dims", "anchor", "structure", "frame", "gamma", "ehresmann", "metric",
                     "lagrangian", "finsler", "base_connection", "obata", "frame_change", "torsions",
                     "sampling", "tolerances", "probes", "lambdas", "description"});
  if (!j.contains("schema") || !j["schema"].is_string() || j["schema"].get<std::string>() != kConfigSchema)
    shape("schema", std::string("must be \"") + kConfigSchema + "\"");

  GeometryConfig c;
  c.source = std::move(source);
  if (!j.contains("dims")) shape("dims", "missing");
  allow_keys(j["dims"], "dims", {"m", "p", "r"});
  for (const char* k : {"m", "p", "r"})
    if (!j["dims"].contains(k)) shape(dot("dims", k), "missing");
  c.m = integer(j["dims"]["m"], "dims.m");
  c.p = integer(j["dims"]["p"], "dims.p");
  c.r = integer(j["dims"]["r"], "dims.r");
  if (c.m < 1 || c.p < 1 || c.r < 0 || c.m + c.r > kMaxVariables)
    throw ConfigError(ErrorCode::DimensionMismatch, "dims", "need m >= 1, p >= 1, r >= 0 and m + r <= 64");
  const Dims d = c.dims();
  const std::size_t m = u(c.m), p = u(c.p), r = u(c.r);

  if (j.contains("probes")) {
    const json& ps = j["probes"];
    if (!ps.is_array()) shape("probes", "expected an array of points");
    for (std::size_t i = 0; i < ps.size(); ++i) c.probes.push_back(point(ps[i], at("probes", i), c.m, c.r));
  }

  // Algebroid: either anchor (+ structure) or a frame.
  if (j.contains("frame")) {
    if (j.contains("anchor") || j.contains("structure"))
      shape("frame", "frame and anchor/structure are mutually exclusive");
    if (c.p != c.m) throw ConfigError(ErrorCode::DimensionMismatch, "frame", "a frame needs p = m");
    const json& f = j["frame"];
    allow_keys(f, "frame", {"theta", "theta_inv"});
    if (!f.contains("theta") || !f.contains("theta_inv")) shape("frame", "needs theta and theta_inv");
    FrameDiffeoData F{c.m, c.r, tensor(f["theta"], "frame.theta", {m, m}, d),
                      tensor(f["theta_inv"], "frame.theta_inv", {m, m}, d)};
    try {
      c.algebroid = std::make_shared<const GeneralizedAlgebroid>(algebroid_from_frame(F, c.probes));
    } catch (const Error& e) {
      throw ConfigError(e.code(), "frame", e.what());
    }
  } else {
    if (!j.contains("anchor")) shape("anchor", "missing (or give a frame)");
    auto rho = tensor(j["anchor"], "anchor", {p, m}, d);
    auto L = j.contains("structure") ? tensor(j["structure"], "structure", {p, p, p}, d)
                                     : std::vector<ScalarField>(p * p * p, ScalarField::zero(d));
    c.algebroid = std::make_shared<const GeneralizedAlgebroid>(c.m, c.p, c.r, std::move(rho), std::move(L));
  }

  if (j.contains("gamma") && j.contains("ehresmann")) shape("gamma", "gamma and ehresmann are mutually exclusive");
  if (j.contains("ehresmann")) {
    c.connection = std::make_shared<const NonlinearConnection>(
        from_ehresmann(c.algebroid, tensor(j["ehresmann"], "ehresmann", {r, m}, d)));
  } else if (j.contains("gamma")) {
    c.connection = std::make_shared<const NonlinearConnection>(c.algebroid, tensor(j["gamma"], "gamma", {r, p}, d));
  } else {
    c.connection = std::make_shared<const NonlinearConnection>(NonlinearConnection::zero(c.algebroid));
  }

  const int metric_sources = int(j.contains("metric")) + int(j.contains("lagrangian")) + int(j.contains("finsler"));
  if (metric_sources > 1) shape("metric", "metric, lagrangian and finsler are mutually exclusive");
  if (j.contains("metric")) {
    const json& g = j["metric"];
    allow_keys(g, "metric", {"h", "v", "h_riemannian", "v_riemannian"});
    if (!g.contains("h") || !g.contains("v")) shape("metric", "needs h and v");
    MetricSpec s;
    s.h = tensor(g["h"], "metric.h", {p, p}, d);
    s.v = tensor(g["v"], "metric.v", {r, r}, d);
    if (g.contains("h_riemannian")) s.h_riemannian = boolean(g["h_riemannian"], "metric.h_riemannian");
    if (g.contains("v_riemannian")) s.v_riemannian = boolean(g["v_riemannian"], "metric.v_riemannian");
    c.metric = std::move(s);
  } else if (j.contains("lagrangian")) {
    c.fundamental = FundamentalFunction{FundamentalKind::Lagrange, expr(j["lagrangian"], "lagrangian", d)};
  } else if (j.contains("finsler")) {
    c.fundamental = FundamentalFunction{FundamentalKind::Finsler, expr(j["finsler"], "finsler", d)};
  }

  if (j.contains("base_connection")) {
    const json& b = j["base_connection"];
    if (b.is_string() && b.get<std::string>() == "berwald") {
      c.base.kind = BaseKind::berwald;
    } else if (b.is_string() && b.get<std::string>() == "zero") {
      c.base.kind = BaseKind::zero;
    } else {
      allow_keys(b, "base_connection", {"hh", "hv", "vh", "vv"});
      c.base.kind = BaseKind::blocks;
      auto block = [&](const char* k, std::vector<std::size_t> ext) {
        return b.contains(k) ? tensor(b[k], dot("base_connection", k), ext, d)
                             : std::vector<ScalarField>(ext[0] * ext[1] * ext[2], ScalarField::zero(d));
      };
      c.base.hh = block("hh", {p, p, p});
      c.base.hv = block("hv", {r, r, p});
      c.base.vh = block("vh", {p, p, r});
      c.base.vv = block("vv", {r, r, r});
    }
  }

  if (j.contains("obata")) {
    const json& o = j["obata"];
    allow_keys(o, "obata", {"xh", "xv", "yh", "yv"});
    auto block = [&](const char* k, std::vector<std::size_t> ext) {
      return o.contains(k) ? tensor(o[k], dot("obata", k), ext, d)
                           : std::vector<ScalarField>(ext[0] * ext[1] * ext[2], ScalarField::zero(d));
    };
    c.obata = ObataTensors{block("xh", {p, p, p}), block("xv", {p, p, r}), block("yh", {r, r, p}),
                           block("yv", {r, r, r})};
  }

  if (j.contains("frame_change")) {
    const json& f = j["frame_change"];
    allow_keys(f, "frame_change", {"lambda", "mmat", "basemap", "basemap_inverse"});
    auto lam = f.contains("lambda") ? tensor(f["lambda"], "frame_change.lambda", {p, p}, d) : identity(c.p, d);
    auto mm = f.contains("mmat") ? tensor(f["mmat"], "frame_change.mmat", {r, r}, d) : identity(c.r, d);
    std::vector<ScalarField> coords;
    for (int i = 0; i < c.m; ++i) coords.push_back(ScalarField::coordinate(d, i));
    auto bm = f.contains("basemap") ? vec(f["basemap"], "frame_change.basemap", m, d) : coords;
    auto bi = f.contains("basemap_inverse") ? vec(f["basemap_inverse"], "frame_change.basemap_inverse", m, d) : coords;
    if (f.contains("basemap") != f.contains("basemap_inverse"))
      shape("frame_change", "basemap and basemap_inverse must be given together");
    try {
      c.frame_change = make_frame_change(c.m, c.p, c.r, std::move(lam), std::move(mm), std::move(bm), std::move(bi));
    } catch (const Error& e) {
      throw ConfigError(e.code(), "frame_change", e.what());
    }
  }

  if (j.contains("torsions")) {
    const json& t = j["torsions"];
    allow_keys(t, "torsions", {"T", "S"});
    auto block = [&](const char* k) {
      return t.contains(k) ? tensor(t[k], dot("torsions", k), {r, r, r}, d)
                           : std::vector<ScalarField>(r * r * r, ScalarField::zero(d));
    };
    c.torsions = TorsionPair{block("T"), block("S")};
  }

  c.sampling.x_box.assign(m, {-1.0, 1.0});
  c.sampling.y_box.assign(r, {-1.0, 1.0});
  if (j.contains("sampling")) {
    const json& s = j["sampling"];
    allow_keys(s, "sampling", {"x_box", "y_box", "count", "seed", "exclude_zero_section", "fiber_floor", "threads"});
    if (s.contains("x_box")) c.sampling.x_box = box(s["x_box"], "sampling.x_box", c.m);
    if (s.contains("y_box")) c.sampling.y_box = box(s["y_box"], "sampling.y_box", c.r);
    if (s.contains("count")) {
      const int n = integer(s["count"], "sampling.count");
      if (n < 1) shape("sampling.count", "must be positive");
      c.sampling.count = u(n);
    }
    if (s.contains("seed")) {
      if (!s["seed"].is_number_unsigned()) shape("sampling.seed", "expected a non-negative integer");
      c.sampling.seed = s["seed"].get<std::uint64_t>();
    }
    if (s.contains("exclude_zero_section"))
      c.sampling.exclude_zero_section = boolean(s["exclude_zero_section"], "sampling.exclude_zero_section");
    if (s.contains("fiber_floor")) c.sampling.fiber_floor = number(s["fiber_floor"], "sampling.fiber_floor");
    if (s.contains("threads")) {
      const int t = integer(s["threads"], "sampling.threads");
      if (t < 0) shape("sampling.threads", "must be >= 0");
      c.threads = static_cast<unsigned>(t);
    }
  }

  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    allow_keys(t, "tolerances", {"all", "structure", "metric", "metrizability", "roundtrip", "torsion", "homogeneity", "euler", "hessian"});
    if (t.contains("all")) c.tol.set_all(number(t["all"], "tolerances.all"));
    const std::pair<const char*, double*> fields[] = {
        {"structure", &c.tol.structure}, {"metric", &c.tol.metric},       {"metrizability", &c.tol.metrizability},
        {"roundtrip", &c.tol.roundtrip}, {"torsion", &c.tol.torsion},     {"homogeneity", &c.tol.homogeneity},
        {"euler", &c.tol.euler},         {"hessian", &c.tol.hessian}};
    for (const auto& [k, dst] : fields)
      if (t.contains(k)) *dst = number(t[k], dot("tolerances", k));
  }

  if (j.contains("lambdas")) {
    const json& ls = j["lambdas"];
    if (!ls.is_array() || ls.empty()) shape("lambdas", "expected a non-empty array");
    c.lambdas.clear();
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const double l = number(ls[i], at("lambdas", i));
      if (!(l > 0)) shape(at("lambdas", i), "must be positive");
      c.lambdas.push_back(l);
    }
  }
  return c;
}

GeometryConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto slash = path.find_last_of("/\\");
  return parse_config(ss.str(), slash == std::string::npos ? path : path.substr(slash + 1));
}

}  // namespace algcalc::cli
