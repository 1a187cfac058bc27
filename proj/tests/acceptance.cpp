// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "algcalc/cli.hpp"
#include "algcalc/expr.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

using namespace algcalc;
using testgeo::fields;

namespace {

const std::string kFixtures = ALGCALC_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double max_residual(const ValidationReport& r) {
  double w = 0;
  for (const auto& x : r.residuals) w = std::isnan(x.max) ? x.max : std::max(w, x.max);
  return w;
}

// Largest |a - b| over two jet arrays evaluated at the points.
double max_diff(const FieldArray& a, const FieldArray& b, const std::vector<Point>& pts) {
  double w = 0;
  for (const auto& p : pts) {
    const auto u = a.eval(p, 0), v = b.eval(p, 0);
    for (std::size_t i = 0; i < u.size(); ++i) w = std::max(w, std::fabs(u[i].value() - v[i].value()));
  }
  return w;
}

bool exactly_equal(const FieldArray& a, const FieldArray& b, const std::vector<Point>& pts) {
  for (const auto& p : pts) {
    const auto u = a.eval(p, 0), v = b.eval(p, 0);
    for (std::size_t i = 0; i < u.size(); ++i)
      if (u[i].value() != v[i].value()) return false;
  }
  return true;
}

ConnectionPtr zero_conn(AlgebroidPtr A) { return std::make_shared<const NonlinearConnection>(NonlinearConnection::zero(A)); }

Outcome ad_correctness() {
  const Dims d{2, 2};
  const std::vector<std::string> exprs = {
      "sin(x1)*exp(y1)",           "x1^3*y2 - 2*x2*y1^2",      "ln(1 + x1^2 + y2^2)",
      "sqrt(2 + x2^2 + y1^2)",     "cos(x1*y2) + tan(0.3*x2)", "(1 + y1^2)^(-1.5)*x2",
      "exp(-(x1^2 + y1^2))*y2",    "x1/(2 + y2^2) - y1*x2",    "pow(2 + y1^2, 0.7) + pi*x1",
      "e^(x2*y1) - y1^4/(3 + x1)"};
  const auto pts = testgeo::sample_points(2, 2, 100, 2024);
  double worst12 = 0, worst3 = 0;
  for (const auto& src : exprs) {
    const ScalarField f = parse_field(src, d);
    for (const auto& p : pts) {
      oracle::Vec v = p.x;
      v.insert(v.end(), p.y.begin(), p.y.end());
      auto fv = [&](const oracle::Vec& z) { return f.value({{z[0], z[1]}, {z[2], z[3]}}); };
      const Jet j = f.eval(p, 2);
      for (int i = 0; i < 4; ++i) {
        const double fd = oracle::fd1(fv, v, i);
        worst12 = std::max(worst12, std::fabs(j.d(i) - fd) / std::max(1.0, std::fabs(fd)));
        for (int k = 0; k < 4; ++k) {
          const double fd2 = oracle::fd2(fv, v, i, k);
          worst12 = std::max(worst12, std::fabs(j.d(i, k) - fd2) / std::max(1.0, std::fabs(fd2)));
        }
      }
    }
    // Nested pipeline: derivative of the Hessian metric of f (f itself at order 3).
    const FieldArray g = hessian_metric({FundamentalKind::Lagrange, f});
    for (std::size_t n = 0; n < 10; ++n) {
      const Point& p = pts[n];
      oracle::Vec v = p.x;
      v.insert(v.end(), p.y.begin(), p.y.end());
      auto fv = [&](const oracle::Vec& z) { return f.value({{z[0], z[1]}, {z[2], z[3]}}); };
      const auto gj = g.eval(p, 1);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          for (int i = 0; i < 4; ++i) {
            auto gab = [&](const oracle::Vec& z) { return 0.5 * oracle::fd2(fv, z, 2 + a, 2 + b, 1e-3); };
            const double fd = oracle::fd1(gab, v, i, 1e-3);
            worst3 = std::max(worst3, std::fabs(gj[a * 2 + b].d(i) - fd) / std::max(1.0, std::fabs(fd)));
          }
    }
  }
  return {worst12 < 1e-6 && worst3 < 1e-4, "orders 1-2 rel " + fmt(worst12) + ", nested order 3 rel " + fmt(worst3)};
}

Outcome algebroid_axioms() {
  struct Case {
    std::string name;
    AlgebroidPtr A;
  };
  std::vector<Case> cases = {{"standard", testgeo::standard_algebroid(3, 2)},
                             {"so3", cli::load_config(kFixtures + "/so3.json").algebroid},
                             {"frame_exp", cli::load_config(kFixtures + "/frame_exp.json").algebroid},
                             {"transform_random", cli::load_config(kFixtures + "/transform_random.json").algebroid}};
  double worst = 0;
  for (const auto& c : cases) {
    const auto pts = testgeo::sample_points(c.A->m(), c.A->r(), 50, 3);
    worst = std::max({worst, max_residual(validate_structure(*c.A, pts, 1e-8)), jacobi_residual(*c.A, pts)});
  }
  const auto& E = *cases[2].A;
  auto theta = [](const oracle::Vec& x) { return oracle::Vec{1, 0, 0, std::exp(x[0])}; };
  double l212 = 0, oracle_gap = 0;
  for (const auto& p : testgeo::sample_points(2, 2, 50, 4)) {
    const double v = E.L(1, 0, 1).value(p);
    l212 = std::max(l212, std::fabs(v - 1.0));
    const auto ref = oracle::commutator_structure(theta, p.x, 2);
    const auto L = E.L().eval(p, 0);
    for (std::size_t i = 0; i < ref.size(); ++i) oracle_gap = std::max(oracle_gap, std::fabs(L[i].value() - ref[i]));
  }
  return {worst < 1e-8 && l212 <= 1e-9 && oracle_gap <= 1e-9,
          "max axiom residual " + fmt(worst) + ", |L^2_12 - 1| " + fmt(l212) + ", oracle gap " + fmt(oracle_gap)};
}

Outcome duality() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto R = testgeo::random_geometry(seed);
    for (const auto& p : testgeo::sample_points(R.m, R.r, 100, seed)) worst = std::max(worst, duality_residual(*R.C, p));
  }
  return {worst < 1e-13, "max |frame x coframe - I| " + fmt(worst)};
}

Outcome transformation_round_trips() {
  const Dims d{2, 2};
  std::vector<std::pair<ConnectionPtr, FrameChange>> cases;
  const auto fx = cli::load_config(kFixtures + "/transform_random.json");
  cases.emplace_back(fx.connection, *fx.frame_change);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto R = testgeo::random_geometry(seed, 2, 2);
    testgeo::PolyGen gen(seed + 100);
    const double a = gen.coef(0.2), b = gen.coef(0.2), c = gen.coef(0.3);
    auto s = [](double v) { return "(" + std::to_string(v) + ")"; };
    auto F = make_frame_change(2, 2, 2, fields({"1 + 0.1*x1^2", s(a) + "*x2", "0", "1"}, d),
                               fields({"2", s(b) + "*x1", "0.1*x2", "1 + 0.2*x2^2"}, d),
                               fields({"x1 + " + s(c) + "*x2^2", "x2"}, d), fields({"x1 - " + s(c) + "*x2^2", "x2"}, d));
    cases.emplace_back(R.C, F);
  }
  double worst = 0;
  bool identity_exact = true;
  for (const auto& [C, F] : cases) {
    const auto pts = testgeo::sample_points(2, 2, 50, 9);
    const auto back = transform_gamma(transform_gamma(*C, F), F.inverse());
    worst = std::max({worst, max_diff(C->gamma(), back.gamma(), pts), max_diff(C->algebroid().rho(), back.algebroid().rho(), pts),
                      max_diff(C->algebroid().L(), back.algebroid().L(), pts)});
    const auto Ab = transform_algebroid(transform_algebroid(C->algebroid(), F), F.inverse());
    worst = std::max({worst, max_diff(C->algebroid().rho(), Ab.rho(), pts), max_diff(C->algebroid().L(), Ab.L(), pts)});
    const auto I = identity_frame_change(2, 2, 2);
    const auto id = transform_gamma(*C, I);
    identity_exact = identity_exact && exactly_equal(C->gamma(), id.gamma(), pts) &&
                     exactly_equal(C->algebroid().rho(), id.algebroid().rho(), pts) &&
                     exactly_equal(C->algebroid().L(), id.algebroid().L(), pts);
  }
  return {worst < 1e-10 && identity_exact,
          "round-trip max " + fmt(worst) + ", identity " + (identity_exact ? "exact" : "NOT exact")};
}

Outcome metrizability() {
  double worst = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto R = testgeo::random_geometry(seed);
    const auto pts = testgeo::sample_points(R.m, R.r, 100, seed + 1000);
    const auto& G = *R.G;
    for (const DConnection& D : {canonical_dconnection(G, *R.base), berwald_canonical(G, R.C),
                                 obata_deform(G, R.XY, R.C), base_deform(G, *R.base)})
      worst = std::max(worst, max_residual(metrizability_residual(D, G, pts, 1e-8)));
  }
  return {worst < 1e-8, "20 geometries x 4 constructions, max residual " + fmt(worst)};
}

Outcome classical_reduction() {
  const auto cfg = cli::load_config(kFixtures + "/poincare.json");
  const MetricStructure G(2, 2, cfg.metric->h, cfg.metric->v);
  const DConnection D = canonical_dconnection(G, berwald(cfg.connection));
  const NormalDConnection N = levi_civita_normal(cfg.connection, symmetric_array(cfg.metric->v, 2));
  const auto L = D.layout();
  auto g = [](const oracle::Vec& x) { return oracle::Vec{1 / (x[1] * x[1]), 0, 0, 1 / (x[1] * x[1])}; };
  std::vector<Point> pts = {{{0.0, 1.0}, {0.3, 0.2}}};
  for (const auto& p : testgeo::sample_points(2, 2, 20, 6)) pts.push_back({{p.x[0], 1.0 + 0.5 * p.x[1]}, p.y});
  double gap = 0;
  for (const auto& p : pts) {
    const auto ref = oracle::christoffel_fd(g, p.x, 2);
    const auto u = D.eval(p, 0), v = N.eval(p, 0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int c = 0; c < 2; ++c) {
          const double r = ref[(a * 2 + b) * 2 + c];
          gap = std::max({gap, std::fabs(u[L.hh(a, b, c)].value() - r), std::fabs(v[N.h(a, b, c)].value() - r)});
        }
  }
  const auto u = D.eval(pts[0], 0), v = N.eval(pts[0], 0);
  double named = 0;
  for (const auto& [a, b, c, want] : std::vector<std::tuple<int, int, int, double>>{{0, 0, 1, -1}, {1, 0, 0, 1}, {1, 1, 1, -1}})
    named = std::max({named, std::fabs(u[L.hh(a, b, c)].value() - want), std::fabs(v[N.h(a, b, c)].value() - want)});
  return {gap < 1e-8 && named < 1e-8, "named symbols off by " + fmt(named) + ", FD oracle gap " + fmt(gap)};
}

Outcome obata_identity() {
  std::vector<std::pair<std::string, MetricStructure>> metrics;
  for (const char* f : {"flat.json", "poincare.json", "so3.json", "frame_exp.json", "transform_random.json"}) {
    const auto c = cli::load_config(kFixtures + "/" + f);
    metrics.emplace_back(f, MetricStructure(c.p, c.r, c.metric->h, c.metric->v));
  }
  for (const char* f : {"randers.json", "euclid_finsler.json", "lagrange_torsion.json"}) {
    const auto c = cli::load_config(kFixtures + "/" + f);
    metrics.emplace_back(f, build_gl_space(hessian_metric(*c.fundamental), c.r));
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) metrics.emplace_back("random", *testgeo::random_geometry(seed).G);
  std::size_t probed = 0, bad = 0;
  for (const auto& [name, G] : metrics) {
    const int m = G.field_dims().m, r = G.field_dims().r;
    auto pts = testgeo::sample_points(m, r, 50, 7, 0.9, true);
    if (name == "poincare.json")
      for (auto& p : pts) p.x[1] = 1.25 + p.x[1] * 0.8;
    for (const auto& p : pts) {
      const auto q = obata_pair(G, p);
      ++probed;
      for (int fam = 0; fam < 2; ++fam) {
        const int n = fam == 0 ? q.p : q.r;
        const auto& O = fam == 0 ? q.h : q.v;
        const auto& S = fam == 0 ? q.h_star : q.v_star;
        for (int a = 0; a < n; ++a)
          for (int e = 0; e < n; ++e)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c) {
                const std::size_t i = ((static_cast<std::size_t>(a) * n + e) * n + b) * n + c;
                if (O[i] + S[i] != ((a == b && e == c) ? 1.0 : 0.0)) ++bad;
              }
      }
    }
  }
  return {bad == 0, std::to_string(metrics.size()) + " metrics, " + std::to_string(probed) + " points, " +
                        std::to_string(bad) + " inexact entries"};
}

std::vector<ScalarField> random_antisymmetric(testgeo::PolyGen& gen, int m, int r) {
  std::vector<std::string> src(static_cast<std::size_t>(r) * r * r, "0");
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = b + 1; c < r; ++c) {
        const std::string p = gen.poly(m, r, 2, 0.5);
        src[(a * r + b) * r + c] = p;
        src[(a * r + c) * r + b] = "-(" + p + ")";
      }
  return fields(src, Dims{m, r});
}

Outcome torsion_theorems() {
  double trip = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = seed % 2 ? 2 : 3;
    const auto R = testgeo::random_geometry(seed, n, n);
    testgeo::PolyGen gen(seed + 500);
    const Dims d{n, n};
    const FieldArray g = FieldArray::from_fields(d, fields(testgeo::random_spd(gen, n, n, n), d));
    const TorsionPair TS{random_antisymmetric(gen, n, n), random_antisymmetric(gen, n, n)};
    const auto D = torsion_deform(levi_civita_normal(R.C, g), g, TS);
    const std::size_t n3 = static_cast<std::size_t>(n) * n * n;
    for (const auto& p : testgeo::sample_points(n, n, 30, seed)) {
      const auto got = recovered_torsions_at(D, p);
      for (std::size_t i = 0; i < n3; ++i)
        trip = std::max({trip, std::fabs(got[i] - TS.T[i].value(p)), std::fabs(got[n3 + i] - TS.S[i].value(p))});
    }
  }
  double lc = 0;
  const auto so3 = cli::load_config(kFixtures + "/so3.json");
  const auto pc = cli::load_config(kFixtures + "/poincare.json");
  const auto Nso3 = levi_civita_normal(so3.connection, symmetric_array(so3.metric->v, 3));
  const auto Npc = levi_civita_normal(pc.connection, symmetric_array(pc.metric->v, 2));
  for (const auto& p : testgeo::sample_points(3, 3, 30, 8))
    for (double t : recovered_torsions_at(Nso3, p)) lc = std::max(lc, std::fabs(t));
  for (auto p : testgeo::sample_points(2, 2, 30, 8)) {
    p.x[1] = 1.25 + 0.7 * p.x[1];
    for (double t : recovered_torsions_at(Npc, p)) lc = std::max(lc, std::fabs(t));
  }
  const Point q = so3.probes.at(0);
  oracle::Vec eps(27);
  const auto L = so3.algebroid->L().eval(q, 0);
  for (std::size_t i = 0; i < 27; ++i) eps[i] = L[i].value();
  const auto ref = oracle::koszul_constant({1, 0, 0, 0, 1, 0, 0, 0, 1}, eps, 3);
  const double h123 = Nso3.eval(q, 0)[Nso3.h(0, 1, 2)].value();
  const double koszul = std::max(std::fabs(h123 + 0.5), std::fabs(h123 - ref[(0 * 3 + 1) * 3 + 2]));
  return {trip < 1e-10 && lc < 1e-8 && koszul <= 1e-10,
          "round trip " + fmt(trip) + ", Levi-Civita torsions " + fmt(lc) + ", H^1_23 = " + fmt(h123)};
}

Outcome finsler() {
  const auto eu = cli::load_config(kFixtures + "/euclid_finsler.json");
  const auto ra = cli::load_config(kFixtures + "/randers.json");
  const auto sq = cli::load_config(kFixtures + "/y1sq_finsler.json");
  const auto pe = generate(eu.sampling).points;
  const auto rep = finsler_checks(eu.fundamental->f, pe, eu.lambdas);
  const double homog = rep.find("finsler.homogeneity")->max, euler = rep.find("finsler.euler")->max;
  const bool pd = rep.find("finsler.positive_definite")->max == 0.0;
  const std::vector<double> two{2.0};
  const double sq_res = finsler_checks(sq.fundamental->f, sq.probes, two).find("finsler.homogeneity")->max;
  const auto pr = generate(ra.sampling).points;
  const bool randers = finsler_checks(ra.fundamental->f, pr, ra.lambdas).pass() &&
                       regularity_check(hessian_metric(*ra.fundamental), 2, pr).pass();
  return {homog < 1e-12 && euler < 1e-10 && pd && sq_res >= 1.0 && randers,
          "Euclidean homogeneity " + fmt(homog) + ", Euler " + fmt(euler) + (pd ? ", PD" : ", NOT PD") +
              "; (y1)^2 residual " + fmt(sq_res) + "; Randers " + (randers ? "passes" : "fails")};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome cli_determinism(const std::string& exe, const std::string& tmp) {
  const std::vector<std::string> fx = {"flat", "poincare", "so3", "frame_exp", "randers", "euclid_finsler",
                                       "y1sq_finsler", "degenerate_lagrangian", "lagrange_torsion", "transform_random"};
  std::size_t same = 0;
  for (const auto& f : fx) {
    std::vector<std::string> outs;
    for (const char* threads : {"1", "1", "4"}) {
      const std::string out = tmp + "/" + f + "." + std::to_string(outs.size()) + ".json";
      const std::string cmd = "\"" + exe + "\" report \"" + kFixtures + "/" + f + ".json\" --threads " + threads +
                              " -o \"" + out + "\" 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      (void)rc;
      outs.push_back(slurp(out));
    }
    if (!outs[0].empty() && outs[0] == outs[1] && outs[0] == outs[2]) ++same;
  }
  return {same == fx.size(), std::to_string(same) + "/" + std::to_string(fx.size()) +
                                 " fixtures byte-identical over 2 runs and 1 vs 4 threads"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string exe = argc > 1 ? argv[1] : ALGCALC_CLI_PATH;
  const std::string tmp = argc > 2 ? argv[2] : ALGCALC_ACCEPTANCE_TMP;
  std::filesystem::create_directories(tmp);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AD correctness", ad_correctness},
      {"algebroid axioms", algebroid_axioms},
      {"adapted-basis duality", duality},
      {"transformation-law round trips", transformation_round_trips},
      {"metrizability of the four constructions", metrizability},
      {"classical reduction (Poincare half-plane)", classical_reduction},
      {"Obata identity", obata_identity},
      {"torsion theorems", torsion_theorems},
      {"Finsler checks", finsler},
      {"CLI determinism", [&] { return cli_determinism(exe, tmp); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
