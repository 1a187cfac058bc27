#include <gtest/gtest.h>

#include <cmath>

#include "algcalc/error.hpp"
#include "algcalc/lagrange.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

using namespace algcalc;
using testgeo::fields;

namespace {

const Dims d22{2, 2};

ScalarField sf(const std::string& s, Dims d) { return fields({s}, d)[0]; }

ConnectionPtr zero_conn(AlgebroidPtr A) { return std::make_shared<const NonlinearConnection>(NonlinearConnection::zero(A)); }

double max_residual(const ValidationReport& r) {
  double w = 0;
  for (const auto& x : r.residuals) w = std::max(w, x.max);
  return w;
}

// Antisymmetric in the last two indices: components with b < c are random, the rest mirrored.
std::vector<ScalarField> random_antisymmetric(testgeo::PolyGen& gen, int m, int r) {
  std::vector<std::string> src(static_cast<std::size_t>(r) * r * r, "0");
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = b + 1; c < r; ++c) {
        const std::string p = gen.poly(m, r, 1, 0.5);
        src[(a * r + b) * r + c] = p;
        src[(a * r + c) * r + b] = "-(" + p + ")";
      }
  return fields(src, Dims{m, r});
}

}  // namespace

TEST(HessianMetric, Examples) {
  const Point pt{{0.3, -0.2}, {0.7, -1.1}};
  const auto I = hessian_metric({FundamentalKind::Lagrange, sf("y1^2 + y2^2", d22)}).eval(pt, 1);
  EXPECT_EQ(I[0].value(), 1.0);
  EXPECT_EQ(I[1].value(), 0.0);
  EXPECT_EQ(I[3].value(), 1.0);
  const auto q = hessian_metric({FundamentalKind::Lagrange, sf("y1^4", d22)}).eval(pt, 0);
  EXPECT_NEAR(q[0].value(), 6 * 0.49, 1e-14);
  const auto e = hessian_metric({FundamentalKind::Finsler, sf("sqrt(y1^2 + y2^2)", d22)}).eval(pt, 0);
  EXPECT_NEAR(e[0].value(), 1.0, 1e-14);
  EXPECT_NEAR(e[1].value(), 0.0, 1e-14);
  EXPECT_NEAR(e[3].value(), 1.0, 1e-14);
}

TEST(HessianMetric, MatchesFiniteDifferences) {
  const ScalarField L = sf("exp(x1*y1) + y1^2*y2^2 + cos(y2 + x2)", d22);
  const auto g = hessian_metric({FundamentalKind::Lagrange, L});
  for (const auto& p : testgeo::sample_points(2, 2, 10, 4)) {
    const auto v = g.eval(p, 0);
    auto f = [&](const oracle::Vec& y) { return L.value({p.x, y}); };
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(v[a * 2 + b].value(), 0.5 * oracle::fd2(f, p.y, a, b), 1e-6);
  }
}

TEST(Regularity, DegenerateAndRanders) {
  const auto pts = testgeo::sample_points(2, 2, 20, 5);
  const auto lin = hessian_metric({FundamentalKind::Lagrange, sf("y1", d22)});
  const auto bad = regularity_check(lin, 2, pts);
  EXPECT_FALSE(bad.pass());
  EXPECT_EQ(bad.find("lagrange.rank_deficit")->max, 2.0);
  const auto half = hessian_metric({FundamentalKind::Lagrange, sf("y1^2", d22)});
  EXPECT_EQ(regularity_check(half, 2, pts).find("lagrange.rank_deficit")->max, 1.0);
  const auto randers = hessian_metric({FundamentalKind::Finsler, sf("sqrt(y1^2 + y2^2) + 0.3*y1", d22)});
  EXPECT_TRUE(regularity_check(randers, 2, pts).pass());
}

TEST(Finsler, Checks) {
  const auto pts = testgeo::sample_points(2, 2, 30, 6);
  const std::vector<double> lambdas{0.5, 2.0, 3.7};
  const auto euclid = finsler_checks(sf("sqrt(y1^2 + y2^2)", d22), pts, lambdas);
  EXPECT_TRUE(euclid.pass());
  const auto randers = finsler_checks(sf("sqrt(y1^2 + y2^2) + 0.3*y1", d22), pts, lambdas);
  EXPECT_TRUE(randers.pass());
  const std::vector<Point> one{{{0.1, 0.2}, {1.0, 0.0}}};
  const std::vector<double> two{2.0};
  const auto sq = finsler_checks(sf("y1^2", d22), one, two);
  EXPECT_DOUBLE_EQ(sq.find("finsler.homogeneity")->max, 2.0);
  EXPECT_DOUBLE_EQ(sq.find("finsler.euler")->max, 1.0);
  EXPECT_FALSE(sq.pass());
  const std::vector<double> neg{-1.0};
  EXPECT_THROW(finsler_checks(sf("y1", d22), one, neg), DimensionMismatch);
  EXPECT_LT(euler_metric_residual(sf("sqrt(y1^2 + y2^2) + 0.3*y1", d22), pts), 1e-8);
  EXPECT_LT(euler_metric_residual(sf("(y1^4 + y2^4)^(1/4)", d22), pts), 1e-8);
}

TEST(LeviCivita, So3MatchesKoszul) {
  const auto C = zero_conn(testgeo::so3_algebroid(3));
  const Dims d{3, 3};
  std::vector<std::string> I(9, "0");
  I[0] = I[4] = I[8] = "1";
  const auto D = levi_civita_normal(C, FieldArray::from_fields(d, fields(I, d)));
  const Point pt{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}};
  const auto v = D.eval(pt, 0);
  oracle::Vec eps(27, 0.0);
  const auto L = C->algebroid().L().eval(pt, 0);
  for (std::size_t i = 0; i < 27; ++i) eps[i] = L[i].value();
  const auto ref = oracle::koszul_constant({1, 0, 0, 0, 1, 0, 0, 0, 1}, eps, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(v[D.h(a, b, c)].value(), ref[(a * 3 + b) * 3 + c], 1e-15);
        EXPECT_EQ(v[D.v(a, b, c)].value(), 0.0);
      }
  EXPECT_EQ(v[D.h(0, 1, 2)].value(), -0.5);
}

TEST(LeviCivita, PoincareMatchesChristoffels) {
  const auto C = zero_conn(testgeo::standard_algebroid(2, 2));
  const auto D = levi_civita_normal(C, FieldArray::from_fields(d22, fields(testgeo::poincare_metric(), d22)));
  auto g = [](const oracle::Vec& x) { return oracle::Vec{1 / (x[1] * x[1]), 0, 0, 1 / (x[1] * x[1])}; };
  const Point pt{{0.3, 1.0}, {0.2, 0.1}};
  EXPECT_NEAR(D.eval(pt, 0)[D.h(0, 0, 1)].value(), -1.0, 1e-14);
  for (double x2 : {0.5, 1.3, 2.0}) {
    const Point q{{0.1, x2}, {0.3, -0.2}};
    const auto ref = oracle::christoffel_fd(g, q.x, 2);
    const auto v = D.eval(q, 0);
    for (int i = 0; i < 8; ++i) EXPECT_NEAR(v[i].value(), ref[i], 1e-8);
  }
}

TEST(LeviCivita, RandomIsMetricCompatibleWithTorsionMinusL) {
  for (std::uint64_t seed : {11u, 12u}) {
    const auto R = testgeo::random_geometry(seed, 2, 2);
    testgeo::PolyGen gen(seed);
    const Dims d{2, 2};
    const auto gf = fields(testgeo::random_spd(gen, 2, 2, 2), d);
    const FieldArray g = FieldArray::from_fields(d, gf);
    const auto D = levi_civita_normal(R.C, g);
    const MetricStructure G(2, 2, gf, gf);
    const auto pts = testgeo::sample_points(2, 2, 20, seed);
    EXPECT_LT(max_residual(metrizability_residual(D.to_dconnection(), G, pts, 1e-8)), 1e-8);
    for (const auto& p : pts)
      for (double t : recovered_torsions_at(D, p)) EXPECT_LT(std::fabs(t), 1e-12);
  }
}

TEST(TorsionDeform, RecoversTorsionsAndStaysCompatible) {
  for (std::uint64_t seed : {21u, 22u}) {
    const auto R = testgeo::random_geometry(seed, 2, 2);
    testgeo::PolyGen gen(seed);
    const Dims d{2, 2};
    const auto gf = fields(testgeo::random_spd(gen, 2, 2, 2), d);
    const FieldArray g = FieldArray::from_fields(d, gf);
    const TorsionPair TS{random_antisymmetric(gen, 2, 2), random_antisymmetric(gen, 2, 2)};
    const auto D = torsion_deform(levi_civita_normal(R.C, g), g, TS);
    const MetricStructure G(2, 2, gf, gf);
    const auto pts = testgeo::sample_points(2, 2, 20, seed);
    EXPECT_LT(max_residual(metrizability_residual(D.to_dconnection(), G, pts, 1e-8)), 1e-8);
    const auto back = recover_torsions(D);
    for (const auto& p : pts) {
      const auto got = recovered_torsions_at(D, p);
      for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_NEAR(got[i], TS.T[i].value(p), 1e-10);
        EXPECT_NEAR(got[8 + i], TS.S[i].value(p), 1e-10);
        EXPECT_EQ(back.T[i].value(p), got[i]);
      }
    }
    // Round trip: deforming the torsion-free connection by the recovered pair reproduces D.
    const auto again = torsion_deform(levi_civita_normal(R.C, g), g, back);
    for (const auto& p : pts) {
      const auto u = D.eval(p, 0), v = again.eval(p, 0);
      for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i].value(), v[i].value(), 1e-10);
    }
  }
}

TEST(TorsionDeform, ConventionsAgreeOnlyWithoutStructure) {
  const auto C = zero_conn(testgeo::standard_algebroid(2, 2));
  testgeo::PolyGen gen(30);
  const FieldArray g = FieldArray::from_fields(d22, fields(testgeo::random_spd(gen, 2, 2, 2), d22));
  const TorsionPair TS{random_antisymmetric(gen, 2, 2), random_antisymmetric(gen, 2, 2)};
  const auto D = torsion_deform(levi_civita_normal(C, g), g, TS);
  const Point pt{{0.2, -0.3}, {0.5, 0.6}};
  EXPECT_EQ(recovered_torsions_at(D, pt), recovered_torsions_at(D, pt, TorsionConvention::minus_structure));
  const auto S = zero_conn(testgeo::so3_algebroid(3));
  const Dims d{3, 3};
  std::vector<std::string> I(9, "0");
  I[0] = I[4] = I[8] = "1";
  const auto E = levi_civita_normal(S, FieldArray::from_fields(d, fields(I, d)));
  const Point q{{0.1, 0.2, 0.3}, {0.4, 0.5, 0.6}};
  EXPECT_EQ(recovered_torsions_at(E, q)[1], 0.0);
  EXPECT_EQ(recovered_torsions_at(E, q, TorsionConvention::minus_structure)[5], -2.0);
}

TEST(TorsionDeform, RejectsNonAntisymmetricInput) {
  const auto C = zero_conn(testgeo::standard_algebroid(2, 2));
  const FieldArray g = FieldArray::from_fields(d22, fields({"1", "0", "0", "1"}, d22));
  TorsionPair TS{fields(std::vector<std::string>(8, "0"), d22), fields(std::vector<std::string>(8, "0"), d22)};
  TS.T[1] = sf("x1", d22);  // T^1_{12} without its mirror
  const auto D = torsion_deform(levi_civita_normal(C, g), g, TS);
  EXPECT_THROW(D.eval({{0.5, 0.1}, {0.2, 0.3}}, 0), AntisymmetryViolation);
  TS.T.pop_back();
  EXPECT_THROW(torsion_deform(levi_civita_normal(C, g), g, TS), DimensionMismatch);
}

TEST(GlSpace, DegenerateLagrangianIsRejected) {
  const auto g = hessian_metric({FundamentalKind::Lagrange, sf("y1^2 + x1*y1", d22)});
  const std::vector<Point> probes{{{0.1, 0.2}, {0.3, 0.4}}};
  EXPECT_THROW(build_gl_space(g, 2, probes), SingularMetric);
  const auto C = zero_conn(testgeo::standard_algebroid(2, 2));
  EXPECT_THROW(levi_civita_normal(C, g).eval(probes[0], 0), SingularMetric);
}

TEST(GlSpace, CanonicalConnectionIsMetrizable) {
  const auto R = testgeo::random_geometry(40, 2, 2);
  const auto g = hessian_metric({FundamentalKind::Lagrange, sf("y1^2 + y2^2 + 0.1*y1^2*y2^2 + x1*y1*y2*0.2", d22)});
  const auto pts = testgeo::sample_points(2, 2, 20, 40, 0.8);
  const MetricStructure G = build_gl_space(g, 2, pts);
  EXPECT_LT(max_residual(metrizability_residual(berwald_canonical(G, R.C), G, pts, 1e-8)), 1e-8);
}
