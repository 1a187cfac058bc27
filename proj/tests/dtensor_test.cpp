#include <gtest/gtest.h>

#include <cmath>

#include "algcalc/dtensor.hpp"
#include "algcalc/error.hpp"
#include "algcalc/expr.hpp"
#include "geometry.hpp"
#include "oracles.hpp"

using namespace algcalc;
using testgeo::fields;

namespace {

constexpr Slot Hc{Family::H, Variance::Contra}, Hco{Family::H, Variance::Co};
constexpr Slot Vc{Family::V, Variance::Contra}, Vco{Family::V, Variance::Co};

ConnectionPtr conn(AlgebroidPtr A, const std::vector<std::string>& g) {
  return std::make_shared<const NonlinearConnection>(A, fields(g, A->field_dims()));
}

DConnection random_dconnection(testgeo::PolyGen& gen, ConnectionPtr C) {
  const int p = C->p(), r = C->r(), m = C->m();
  const Dims d = C->field_dims();
  return DConnection::from_blocks(C, fields(gen.polys(p * p * p, m, r, 2, 0.7), d),
                                  fields(gen.polys(r * r * p, m, r, 2, 0.7), d),
                                  fields(gen.polys(p * p * r, m, r, 2, 0.7), d),
                                  fields(gen.polys(r * r * r, m, r, 2, 0.7), d));
}

ConnectionPtr random_setting(testgeo::PolyGen& gen, int m, int r) {
  const auto A = std::make_shared<const GeneralizedAlgebroid>(algebroid_from_frame(testgeo::random_frame(gen, m, r)));
  return conn(A, gen.polys(r * m, m, r, 2, 0.7));
}

DTensorField random_tensor(testgeo::PolyGen& gen, int m, int p, int r, IndexSignature sig) {
  const auto n = sig.component_count(p, r);
  return DTensorField::from_fields(p, r, sig, fields(gen.polys(n, m, r, 2, 1.0), Dims{m, r}));
}

double max_diff(const DTensorField& a, const DTensorField& b, const std::vector<Point>& pts) {
  double worst = 0;
  for (const auto& p : pts) {
    const auto u = a.eval(p, 0), v = b.eval(p, 0);
    EXPECT_EQ(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::fabs(u[i].value() - v[i].value()));
  }
  return worst;
}

}  // namespace

TEST(Signature, CountsAndAppend) {
  const IndexSignature s({Hc, Vco, Vco});
  EXPECT_EQ(s.component_count(3, 2), 12u);
  EXPECT_EQ(s.appended(Hco).rank(), 4u);
  EXPECT_THROW(IndexSignature(std::vector<Slot>(9, Hc)), DimensionMismatch);
}

TEST(Berwald, Examples) {
  const auto A = testgeo::standard_algebroid(1, 1);
  const DConnection B = berwald(conn(A, {"y1^2"}));
  const auto v = B.eval({{0.2}, {1.25}}, 0);
  const auto L = B.layout();
  EXPECT_DOUBLE_EQ(v[L.hh(0, 0, 0)].value(), 2.5);
  EXPECT_DOUBLE_EQ(v[L.hv(0, 0, 0)].value(), 2.5);
  EXPECT_DOUBLE_EQ(v[L.vh(0, 0, 0)].value(), 0.0);
  EXPECT_DOUBLE_EQ(v[L.vv(0, 0, 0)].value(), 0.0);

  const auto A2 = testgeo::standard_algebroid(2, 2);
  const DConnection lin = berwald(conn(A2, {"2*y1 - y2", "0.5*y2", "3*y1", "-y1 + 4*y2"}));
  const double c[2][2][2] = {{{2, 0}, {-1, 0.5}}, {{3, -1}, {0, 4}}};  // c[a][b][g] = dGamma^a_g / dy^b
  for (const auto& p : testgeo::sample_points(2, 2, 5, 1)) {
    const auto w = lin.eval(p, 0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int g = 0; g < 2; ++g) EXPECT_DOUBLE_EQ(w[lin.layout().hh(a, b, g)].value(), c[a][b][g]);
  }
  for (const auto& j : berwald(conn(A2, {"0", "0", "0", "0"})).eval({{0.1, 0.1}, {0.2, 0.2}}, 1))
    EXPECT_EQ(j.value(), 0.0);
  const auto A32 = testgeo::standard_algebroid(3, 2);
  EXPECT_THROW(berwald(std::make_shared<const NonlinearConnection>(NonlinearConnection::zero(A32))), DimensionMismatch);
}

TEST(CovariantDerivative, ScalarIsDeltaAction) {
  testgeo::PolyGen gen(1);
  const auto C = random_setting(gen, 2, 2);
  const auto D = random_dconnection(gen, C);
  const ScalarField f = parse_field(gen.poly(2, 2, 2, 1.0), Dims{2, 2});
  const auto T = DTensorField::from_fields(2, 2, IndexSignature{}, {f});
  const auto h = h_cov_deriv(D, T);
  const auto v = v_cov_deriv(D, T);
  EXPECT_EQ(h.signature().rank(), 1u);
  for (const auto& p : testgeo::sample_points(2, 2, 10, 2)) {
    const auto hv = h.eval(p, 0), vv = v.eval(p, 0);
    for (int g = 0; g < 2; ++g) EXPECT_NEAR(hv[g].value(), delta_action(*C, g, f).value(p), 1e-13);
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(vv[c].value(), f.eval(p, 1).d(2 + c), 1e-13);
  }
  const auto hg = h_cov_deriv(D, T, 1);
  EXPECT_EQ(hg.signature().rank(), 0u);
}

TEST(CovariantDerivative, KroneckerIsParallel) {
  testgeo::PolyGen gen(2);
  const auto C = random_setting(gen, 3, 2);
  const auto D = random_dconnection(gen, C);
  const Dims d{3, 2};
  for (auto fam : {Family::H, Family::V}) {
    const int n = fam == Family::H ? 3 : 2;
    std::vector<ScalarField> k;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) k.push_back(ScalarField::constant(d, a == b ? 1.0 : 0.0));
    const auto T = DTensorField::from_fields(3, 2, IndexSignature({{fam, Variance::Contra}, {fam, Variance::Co}}), k);
    for (const auto& p : testgeo::sample_points(3, 2, 10, 3)) {
      for (const auto& j : h_cov_deriv(D, T).eval(p, 0)) EXPECT_NEAR(j.value(), 0.0, 1e-14);
      for (const auto& j : v_cov_deriv(D, T).eval(p, 0)) EXPECT_NEAR(j.value(), 0.0, 1e-14);
    }
  }
}

TEST(CovariantDerivative, LiouvilleVectorUnderBerwald) {
  const auto A = testgeo::standard_algebroid(1, 1);
  const auto C = conn(A, {"y1"});
  const DConnection B = berwald(C);
  const auto W = DTensorField::from_fields(1, 1, IndexSignature({Vc}), fields({"y1"}, Dims{1, 1}));
  const Point p{{0.3}, {1.7}};
  EXPECT_NEAR(h_cov_deriv(B, W).eval(p, 0)[0].value(), 0.0, 1e-15);
  // With V = 0, W^a|_c = delta^a_c.
  const auto Z = DConnection::zero(conn(testgeo::standard_algebroid(2, 2), {"y1", "x1", "0", "y2"}));
  const auto W2 = DTensorField::from_fields(2, 2, IndexSignature({Vc}), fields({"y1", "y2"}, Dims{2, 2}));
  const auto v = v_cov_deriv(Z, W2).eval({{0.1, 0.2}, {0.3, 0.4}}, 0);
  EXPECT_EQ(v[0].value(), 1.0);
  EXPECT_EQ(v[1].value(), 0.0);
  EXPECT_EQ(v[2].value(), 0.0);
  EXPECT_EQ(v[3].value(), 1.0);
}

TEST(CovariantDerivative, AlongSection) {
  testgeo::PolyGen gen(3);
  const auto C = random_setting(gen, 2, 2);
  const auto D = random_dconnection(gen, C);
  const Dims d{2, 2};
  const auto T = random_tensor(gen, 2, 2, 2, IndexSignature({Hc, Vco}));
  const auto pts = testgeo::sample_points(2, 2, 10, 4);
  const Section zero{std::vector<ScalarField>(2, ScalarField::zero(d)), std::vector<ScalarField>(2, ScalarField::zero(d))};
  for (const auto& p : pts)
    for (const auto& j : cov_deriv_along(D, zero, T).eval(p, 0)) EXPECT_EQ(j.value(), 0.0);
  Section e1 = zero;
  e1.Z[1] = ScalarField::constant(d, 1.0);
  EXPECT_LT(max_diff(cov_deriv_along(D, e1, T), h_cov_deriv(D, T, 1), pts), 1e-14);
  const Section X{fields(gen.polys(2, 2, 2, 1, 1.0), d), fields(gen.polys(2, 2, 2, 1, 1.0), d)};
  const Section Y{fields(gen.polys(2, 2, 2, 1, 1.0), d), fields(gen.polys(2, 2, 2, 1, 1.0), d)};
  Section XY = X;
  for (int i = 0; i < 2; ++i) {
    XY.Z[i] = X.Z[i] + 2.0 * Y.Z[i];
    XY.Y[i] = X.Y[i] + 2.0 * Y.Y[i];
  }
  const auto a = cov_deriv_along(D, XY, T), b = cov_deriv_along(D, X, T), c = cov_deriv_along(D, Y, T);
  for (const auto& p : pts) {
    const auto u = a.eval(p, 0), v = b.eval(p, 0), w = c.eval(p, 0);
    for (std::size_t i = 0; i < u.size(); ++i) EXPECT_NEAR(u[i].value(), v[i].value() + 2 * w[i].value(), 1e-12);
  }
}

TEST(CovariantDerivative, LeibnizOverTensorProduct) {
  testgeo::PolyGen gen(4);
  const auto C = random_setting(gen, 2, 2);
  const auto D = random_dconnection(gen, C);
  const auto S = random_tensor(gen, 2, 2, 2, IndexSignature({Hc, Vco}));
  const auto T = random_tensor(gen, 2, 2, 2, IndexSignature({Vc}));
  const auto pts = testgeo::sample_points(2, 2, 10, 5);
  for (int which = 0; which < 2; ++which) {
    auto deriv = [&](const DTensorField& X) { return which == 0 ? h_cov_deriv(D, X) : v_cov_deriv(D, X); };
    // (S x T)_{|g} has slots (S..., T..., g); move g behind S for S_{|g} x T.
    const auto lhs = deriv(tensor_product(S, T));
    const auto t1 = permute_slots(tensor_product(deriv(S), T), {0, 1, 3, 2});
    const auto t2 = tensor_product(S, deriv(T));
    for (const auto& p : pts) {
      const auto l = lhs.eval(p, 0), a = t1.eval(p, 0), b = t2.eval(p, 0);
      for (std::size_t i = 0; i < l.size(); ++i) EXPECT_NEAR(l[i].value(), a[i].value() + b[i].value(), 1e-9);
    }
  }
}

TEST(CovariantDerivative, CommutesWithSlotPermutation) {
  testgeo::PolyGen gen(5);
  const auto C = random_setting(gen, 2, 2);
  const auto D = random_dconnection(gen, C);
  const auto T = random_tensor(gen, 2, 2, 2, IndexSignature({Hc, Vco, Hco}));
  const std::vector<int> perm = {2, 0, 1};
  const auto pts = testgeo::sample_points(2, 2, 5, 6);
  EXPECT_EQ(max_diff(h_cov_deriv(D, permute_slots(T, perm)), permute_slots(h_cov_deriv(D, T), {2, 0, 1, 3}), pts), 0.0);
  EXPECT_EQ(max_diff(v_cov_deriv(D, permute_slots(T, perm)), permute_slots(v_cov_deriv(D, T), {2, 0, 1, 3}), pts), 0.0);
}

TEST(CovariantDerivative, ClassicalReductionMatchesHandCodedFormula) {
  // rho = id, L = 0, p = r = m = 2, T^alpha_b with one contra-H and one co-V slot.
  testgeo::PolyGen gen(6);
  const Dims d{2, 2};
  const auto Nsrc = gen.polys(4, 2, 2, 2, 0.7);
  const auto C = conn(testgeo::standard_algebroid(2, 2), Nsrc);
  const auto D = random_dconnection(gen, C);
  const auto Tsrc = gen.polys(4, 2, 2, 2, 1.0);
  const auto T = DTensorField::from_fields(2, 2, IndexSignature({Hc, Vco}), fields(Tsrc, d));
  const auto N = fields(Nsrc, d);
  const auto Tf = fields(Tsrc, d);
  const auto h = h_cov_deriv(D, T), v = v_cov_deriv(D, T);
  const auto L = D.layout();
  for (const auto& p : testgeo::sample_points(2, 2, 10, 7)) {
    const oracle::Vec z = {p.x[0], p.x[1], p.y[0], p.y[1]};
    auto fn = [&](const ScalarField& f) {
      return [&f](const oracle::Vec& u) { return f.value({{u[0], u[1]}, {u[2], u[3]}}); };
    };
    const auto B = D.eval(p, 0);
    const auto hv = h.eval(p, 0), vv = v.eval(p, 0);
    for (int al = 0; al < 2; ++al)
      for (int b = 0; b < 2; ++b) {
        const auto& f = Tf[al * 2 + b];
        for (int g = 0; g < 2; ++g) {
          double s = oracle::fd1(fn(f), z, g);
          for (int a = 0; a < 2; ++a) s -= N[a * 2 + g].value(p) * oracle::fd1(fn(f), z, 2 + a);
          for (int e = 0; e < 2; ++e) s += B[L.hh(al, e, g)].value() * Tf[e * 2 + b].value(p);
          for (int dd = 0; dd < 2; ++dd) s -= B[L.hv(dd, b, g)].value() * Tf[al * 2 + dd].value(p);
          EXPECT_NEAR(hv[(al * 2 + b) * 2 + g].value(), s, 1e-9);
        }
        for (int c = 0; c < 2; ++c) {
          double s = oracle::fd1(fn(f), z, 2 + c);
          for (int e = 0; e < 2; ++e) s += B[L.vh(al, e, c)].value() * Tf[e * 2 + b].value(p);
          for (int dd = 0; dd < 2; ++dd) s -= B[L.vv(dd, b, c)].value() * Tf[al * 2 + dd].value(p);
          EXPECT_NEAR(vv[(al * 2 + b) * 2 + c].value(), s, 1e-9);
        }
      }
  }
}

TEST(Contraction, TraceOfKronecker) {
  const Dims d{3, 2};
  std::vector<ScalarField> k;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) k.push_back(ScalarField::constant(d, a == b ? 1.0 : 0.0));
  const auto T = DTensorField::from_fields(3, 2, IndexSignature({Vc, Vco}), k);
  EXPECT_EQ(contract(T, 0, 1).eval({{0, 0, 0}, {1, 1}}, 0)[0].value(), 2.0);
  EXPECT_THROW(contract(T, 0, 0), IndexOutOfRange);
  const auto U = DTensorField::from_fields(3, 2, IndexSignature({Vc, Vc}), k);
  EXPECT_THROW(contract(U, 0, 1), DimensionMismatch);
}

TEST(DConnectionChange, IdentityAndConstantMatrices) {
  testgeo::PolyGen gen(7);
  const auto C = random_setting(gen, 2, 2);
  const auto D = random_dconnection(gen, C);
  const auto pts = testgeo::sample_points(2, 2, 10, 8);
  const auto I = transform_dconnection(D, identity_frame_change(2, 2, 2));
  for (const auto& p : pts) {
    const auto a = D.eval(p, 0), b = I.eval(p, 0);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].value(), b[i].value(), 1e-15);
  }
  const Dims d{2, 2};
  const double M[4] = {2, 1, 0.5, 3}, Mi[4] = {3 / 5.5, -1 / 5.5, -0.5 / 5.5, 2 / 5.5};
  const auto F = make_frame_change(2, 2, 2, fields({"1", "0.5", "0", "2"}, d), fields({"2", "1", "0.5", "3"}, d),
                                   fields({"x1", "x2"}, d), fields({"x1", "x2"}, d));
  const auto T = transform_dconnection(D, F);
  const auto L = D.layout();
  for (const auto& p : pts) {
    const auto a = D.eval(p, 0), b = T.eval(p, 0);
    for (int ap = 0; ap < 2; ++ap)
      for (int bp = 0; bp < 2; ++bp)
        for (int cp = 0; cp < 2; ++cp) {
          double s = 0;
          for (int a1 = 0; a1 < 2; ++a1)
            for (int b1 = 0; b1 < 2; ++b1)
              for (int c1 = 0; c1 < 2; ++c1)
                s += M[ap * 2 + a1] * a[L.vv(a1, b1, c1)].value() * Mi[b1 * 2 + bp] * Mi[c1 * 2 + cp];
          EXPECT_NEAR(b[L.vv(ap, bp, cp)].value(), s, 1e-12);
        }
  }
}

TEST(DConnectionChange, RoundTrip) {
  for (std::uint64_t seed : {41u, 42u}) {
    testgeo::PolyGen gen(seed);
    const auto C = random_setting(gen, 2, 2);
    const auto D = random_dconnection(gen, C);
    const Dims d{2, 2};
    auto near_identity = [&](int n) {
      auto v = gen.polys(n * n, 2, 2, 2, 0.2, true);
      for (int i = 0; i < n; ++i) v[i * n + i] = "1 + " + v[i * n + i];
      return fields(v, d);
    };
    const auto F = make_frame_change(2, 2, 2, near_identity(2), near_identity(2), fields({"x1 + x2^3", "x2"}, d),
                                     fields({"x1 - x2^3", "x2"}, d));
    const auto back = transform_dconnection(transform_dconnection(D, F), F.inverse());
    for (const auto& p : testgeo::sample_points(2, 2, 20, seed)) {
      const auto a = D.eval(p, 0), b = back.eval(p, 0);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i].value(), b[i].value(), 1e-10);
    }
  }
}
