#include "geometry.hpp"

#include <cstdio>

#include "algcalc/expr.hpp"

namespace testgeo {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "(%.6f)", v);
  return buf;
}

std::string var(int i, int m) { return i < m ? "x" + std::to_string(i + 1) : "y" + std::to_string(i - m + 1); }

std::string product(const std::string& a, const std::string& b) { return "(" + a + ")*(" + b + ")"; }

}  // namespace

double PolyGen::coef(double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return u(rng_);
}

std::string PolyGen::poly(int m, int r, int degree, double scale, bool x_only) {
  const int nv = x_only ? m : m + r;
  std::string s = num(coef(scale));
  for (int i = 0; i < nv; ++i) {
    s += " + " + num(coef(scale)) + "*" + var(i, m);
    if (degree >= 2)
      for (int j = i; j < nv; ++j) s += " + " + num(coef(scale)) + "*" + var(i, m) + "*" + var(j, m);
  }
  return s;
}

std::vector<std::string> PolyGen::polys(std::size_t n, int m, int r, int degree, double scale,
                                        bool x_only) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(poly(m, r, degree, scale, x_only));
  return out;
}

std::vector<ScalarField> fields(const std::vector<std::string>& src, Dims d) {
  std::vector<ScalarField> out;
  for (const auto& s : src) out.push_back(parse_field(s, d));
  return out;
}

FrameDiffeoData random_frame(PolyGen& gen, int m, int r) {
  const Dims d{m, r};
  std::vector<std::string> D(m), Dinv(m), N(m * m, "0");
  for (int a = 0; a < m; ++a) {
    const std::string e = gen.poly(m, r, 1, 0.3, true);
    D[a] = "exp(" + e + ")";
    Dinv[a] = "exp(-(" + e + "))";
  }
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) N[a * m + b] = gen.poly(m, r, 2, 0.4, true);
  // (I - N + N^2)[i][j]
  std::vector<std::string> K(m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      std::string s = i == j ? "1" : "0";
      if (j > i) {
        s += " - (" + N[i * m + j] + ")";
        for (int k = i + 1; k < j; ++k) s += " + " + product(N[i * m + k], N[k * m + j]);
      }
      K[i * m + j] = s;
    }
  FrameDiffeoData F;
  F.m = m;
  F.r = r;
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < m; ++i) {
      const std::string in = i == a ? "1" : (i > a ? N[a * m + i] : "0");
      F.theta.push_back(parse_field(product(D[a], in), d));
    }
  for (int i = 0; i < m; ++i)
    for (int g = 0; g < m; ++g) F.theta_inv.push_back(parse_field(product(K[i * m + g], Dinv[g]), d));
  return F;
}

std::vector<std::string> random_spd(PolyGen& gen, int n, int m, int r, bool x_only) {
  const auto A = gen.polys(n * n, m, r, 1, 0.5, x_only);
  std::vector<std::string> g(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::string s = i == j ? "1" : "0";
      for (int k = 0; k < n; ++k) s += " + " + product(A[k * n + i], A[k * n + j]);
      g[i * n + j] = s;
    }
  return g;
}

RandomGeometry random_geometry(std::uint64_t seed, int m, int r) {
  PolyGen gen(seed);
  const Dims d{m, r};
  RandomGeometry G;
  G.m = G.p = m;
  G.r = r;
  const FrameDiffeoData F = random_frame(gen, m, r);
  G.A = std::make_shared<const GeneralizedAlgebroid>(algebroid_from_frame(F));
  G.C = std::make_shared<const NonlinearConnection>(G.A, fields(gen.polys(r * m, m, r, 2, 0.5), d));
  G.G = std::make_shared<MetricStructure>(m, r, fields(random_spd(gen, m, m, r), d),
                                          fields(random_spd(gen, r, m, r), d));
  const int p = m;
  G.XY.xh = fields(gen.polys(p * p * p, m, r, 1, 0.5), d);
  G.XY.xv = fields(gen.polys(p * p * r, m, r, 1, 0.5), d);
  G.XY.yh = fields(gen.polys(r * r * p, m, r, 1, 0.5), d);
  G.XY.yv = fields(gen.polys(r * r * r, m, r, 1, 0.5), d);
  G.base = std::make_shared<DConnection>(DConnection::from_blocks(
      G.C, fields(gen.polys(p * p * p, m, r, 1, 0.5), d), fields(gen.polys(r * r * p, m, r, 1, 0.5), d),
      fields(gen.polys(p * p * r, m, r, 1, 0.5), d), fields(gen.polys(r * r * r, m, r, 1, 0.5), d)));
  return G;
}

std::vector<Point> sample_points(int m, int r, std::size_t count, std::uint64_t seed,
                                 double half_width, bool exclude_zero) {
  SampleSpec spec;
  spec.x_box.assign(m, {-half_width, half_width});
  spec.y_box.assign(r, {-half_width, half_width});
  spec.count = count;
  spec.seed = seed;
  spec.exclude_zero_section = exclude_zero;
  return generate(spec).points;
}

AlgebroidPtr so3_algebroid(int r) {
  const Dims d{3, r};
  std::vector<ScalarField> rho(9, ScalarField::zero(d)), L(27, ScalarField::zero(d));
  auto eps = [](int a, int b, int c) { return static_cast<double>((a - b) * (b - c) * (c - a)) / 2.0; };
  for (int g = 0; g < 3; ++g)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) L[(g * 3 + a) * 3 + b] = ScalarField::constant(d, eps(g, a, b));
  return std::make_shared<const GeneralizedAlgebroid>(3, 3, r, rho, L);
}

AlgebroidPtr standard_algebroid(int m, int r) {
  return std::make_shared<const GeneralizedAlgebroid>(GeneralizedAlgebroid::standard(m, r));
}

std::vector<std::string> poincare_metric() { return {"1/x2^2", "0", "0", "1/x2^2"}; }

}  // namespace testgeo
