#include "algcalc/lagrange.hpp"

#include <cmath>

#include "algcalc/error.hpp"
#include "algcalc/linalg.hpp"

namespace algcalc {

namespace {

std::vector<double> values(const std::vector<Jet>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.value());
  return out;
}

void require_square(const FieldArray& g, int r) {
  if (g.size() != static_cast<std::size_t>(r) * r) throw DimensionMismatch("metric must be r x r");
}

void check_antisymmetric(const std::vector<Jet>& t, int r, const char* name, const Point& pt) {
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = b; c < r; ++c) {
        const double u = t[(a * r + b) * r + c].value(), w = t[(a * r + c) * r + b].value();
        if (std::fabs(u + w) > 1e-12 * std::max({1.0, std::fabs(u), std::fabs(w)}))
          throw AntisymmetryViolation(std::string(name) + " is not antisymmetric in its lower pair at " +
                                      to_string(pt));
      }
}

}  // namespace

FieldArray hessian_metric(const FundamentalFunction& F) {
  const Dims d = F.f.dims();
  const int r = d.r;
  const ScalarField f = F.f;
  const bool finsler = F.kind == FundamentalKind::Finsler;
  return FieldArray(
      d, static_cast<std::size_t>(r) * r,
      [f, finsler, d, r](const Point& pt, int k) {
        if (k + 2 > 3) throw OrderExceeded("hessian metric is available to jet order 1");
        Jet L = f.eval(pt, k + 2);
        if (finsler) L = L * L;
        std::vector<Jet> g(static_cast<std::size_t>(r) * r);
        for (int a = 0; a < r; ++a) {
          const Jet da = L.partial(d.m + a);
          for (int b = a; b < r; ++b) {
            g[a * r + b] = 0.5 * da.partial(d.m + b);
            if (b != a) g[b * r + a] = g[a * r + b];
          }
        }
        return g;
      },
      f.dependence());
}

ValidationReport regularity_check(const FieldArray& g, int r, std::span<const Point> pts,
                                  unsigned threads) {
  require_square(g, r);
  auto deficit = parallel_map(pts.size(), threads, [&](std::size_t i) {
    return static_cast<double>(r - numeric_rank(values(g.eval(pts[i], 0)), r, r));
  });
  ValidationReport rep;
  rep.points = pts.size();
  rep.add(make_residual("lagrange.rank_deficit", deficit, pts, 0.0));
  return rep;
}

ValidationReport finsler_checks(const ScalarField& F, std::span<const Point> pts,
                                std::span<const double> lambdas, FinslerTolerances tol,
                                unsigned threads) {
  for (double l : lambdas)
    if (!(l > 0.0)) throw DimensionMismatch("homogeneity factors must be positive");
  const Dims d = F.dims();
  const FieldArray g = hessian_metric({FundamentalKind::Finsler, F});
  struct Out {
    double hom = 0.0, euler = 0.0, pd = 0.0;
  };
  auto per = parallel_map(pts.size(), threads, [&](std::size_t i) {
    const Point& pt = pts[i];
    Out o;
    const Jet f = F.eval(pt, 1);
    for (double l : lambdas) {
      Point q = pt;
      for (auto& y : q.y) y *= l;
      const double h = std::fabs(F.value(q) - l * f.value());
      if (std::isnan(h) || h > o.hom) o.hom = h;
    }
    double e = -f.value();
    for (int a = 0; a < d.r; ++a) e += pt.y[a] * f.d(d.m + a);
    o.euler = std::fabs(e);
    o.pd = positive_definite(values(g.eval(pt, 0)), d.r) ? 0.0 : 1.0;
    return o;
  });
  std::vector<double> hom, eul, pd;
  for (const auto& o : per) {
    hom.push_back(o.hom);
    eul.push_back(o.euler);
    pd.push_back(o.pd);
  }
  ValidationReport rep;
  rep.points = pts.size();
  rep.add(make_residual("finsler.homogeneity", hom, pts, tol.homogeneity));
  rep.add(make_residual("finsler.euler", eul, pts, tol.euler));
  rep.add(make_residual("finsler.positive_definite", pd, pts, 0.0));
  return rep;
}

double euler_metric_residual(const ScalarField& F, std::span<const Point> pts) {
  const FieldArray g = hessian_metric({FundamentalKind::Finsler, F});
  const int r = F.dims().r;
  double worst = 0.0;
  for (const auto& pt : pts) {
    const auto gv = values(g.eval(pt, 0));
    double s = 0.0;
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) s += pt.y[a] * pt.y[b] * gv[a * r + b];
    const double f = F.value(pt);
    worst = std::max(worst, std::fabs(s - f * f));
  }
  return worst;
}

NormalDConnection levi_civita_normal(ConnectionPtr C, const FieldArray& g) {
  if (C->p() != C->r()) throw DimensionMismatch("Levi-Civita-type connection requires p = r");
  const int r = C->r();
  require_square(g, r);
  if (!(g.dims() == C->field_dims())) throw DimensionMismatch("metric field dimensions");
  const int nv = C->field_dims().nvars();
  const std::size_t n3 = static_cast<std::size_t>(r) * r * r;
  FieldArray blocks(
      C->field_dims(), 2 * n3,
      [C, g, r, nv, n3](const Point& pt, int k) {
        const GeneralizedAlgebroid& A = C->algebroid();
        const auto ad = adapted_derivations(*C, pt, k);
        const auto g1 = g.eval(pt, k + 1);
        std::vector<Jet> gk, gi;
        for (const auto& j : g1) gk.push_back(j.truncated(k));
        if (!try_invert(gk, r, gi)) throw SingularMetric("metric is singular at " + to_string(pt));
        const auto L = A.L().eval(pt, k);
        auto Lf = [&](int d, int a, int b) -> const Jet& { return L[A.L_index(d, a, b)]; };
        auto G = [&](int a, int b) -> const Jet& { return gk[a * r + b]; };
        const Jet zero(nv, k);
        // dg[(e*r + b)*r + c] = delta_c g_{eb} and vg the same with d/dy^c.
        std::vector<Jet> dg(n3), vg(n3);
        for (int e = 0; e < r; ++e)
          for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
              dg[(e * r + b) * r + c] = delta_jet(*C, ad, c, g1[e * r + b]);
              vg[(e * r + b) * r + c] = vertical_jet(*C, ad, c, g1[e * r + b]);
            }
        auto at = [r](int a, int b, int c) { return (static_cast<std::size_t>(a) * r + b) * r + c; };
        std::vector<Jet> lowH(n3, zero), lowV(n3, zero);
        for (int e = 0; e < r; ++e)
          for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
              Jet s = dg[at(e, c, b)] + dg[at(b, e, c)] - dg[at(b, c, e)];
              for (int d = 0; d < r; ++d)
                s += -G(c, d) * Lf(d, b, e) + G(b, d) * Lf(d, e, c) - G(e, d) * Lf(d, b, c);
              lowH[at(e, b, c)] = std::move(s);
              lowV[at(e, b, c)] = vg[at(e, c, b)] + vg[at(b, e, c)] - vg[at(b, c, e)];
            }
        std::vector<Jet> out(2 * n3, zero);
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
              Jet h = zero, v = zero;
              for (int e = 0; e < r; ++e) {
                h += gi[a * r + e] * lowH[at(e, b, c)];
                v += gi[a * r + e] * lowV[at(e, b, c)];
              }
              out[at(a, b, c)] = 0.5 * h;
              out[n3 + at(a, b, c)] = 0.5 * v;
            }
        return out;
      },
      all_variables(C->field_dims()));
  return NormalDConnection(C, std::move(blocks));
}

NormalDConnection torsion_deform(const NormalDConnection& base, const FieldArray& g,
                                 const TorsionPair& TS) {
  const int r = base.r();
  require_square(g, r);
  const std::size_t n3 = static_cast<std::size_t>(r) * r * r;
  if (TS.T.size() != n3 || TS.S.size() != n3) throw DimensionMismatch("torsions must be r x r x r");
  const Dims dims = base.nlconn().field_dims();
  const int nv = dims.nvars();
  std::vector<ScalarField> ts = TS.T;
  ts.insert(ts.end(), TS.S.begin(), TS.S.end());
  const FieldArray tsa = FieldArray::from_fields(dims, std::move(ts));
  FieldArray blocks(
      dims, 2 * n3,
      [base, g, tsa, r, nv, n3](const Point& pt, int k) {
        auto out = base.eval(pt, k);
        const auto t = tsa.eval(pt, k);
        const std::vector<Jet> T(t.begin(), t.begin() + n3), S(t.begin() + n3, t.end());
        check_antisymmetric(T, r, "T", pt);
        check_antisymmetric(S, r, "S", pt);
        const auto gk = g.eval(pt, k);
        std::vector<Jet> gi;
        if (!try_invert(gk, r, gi)) throw SingularMetric("metric is singular at " + to_string(pt));
        auto at = [r](int a, int b, int c) { return (static_cast<std::size_t>(a) * r + b) * r + c; };
        const Jet zero(nv, k);
        for (int q = 0; q < 2; ++q) {
          const std::vector<Jet>& X = q == 0 ? T : S;
          std::vector<Jet> low(n3, zero);
          for (int e = 0; e < r; ++e)
            for (int b = 0; b < r; ++b)
              for (int c = 0; c < r; ++c) {
                Jet s = zero;
                for (int d = 0; d < r; ++d)
                  s += gk[e * r + d] * X[at(d, b, c)] - gk[b * r + d] * X[at(d, e, c)] +
                       gk[c * r + d] * X[at(d, b, e)];
                low[at(e, b, c)] = std::move(s);
              }
          for (int a = 0; a < r; ++a)
            for (int b = 0; b < r; ++b)
              for (int c = 0; c < r; ++c) {
                Jet s = zero;
                for (int e = 0; e < r; ++e) s += gi[a * r + e] * low[at(e, b, c)];
                out[q * n3 + at(a, b, c)] += 0.5 * s;
              }
        }
        return out;
      },
      all_variables(dims));
  return NormalDConnection(base.nlconn_ptr(), std::move(blocks));
}

namespace {

std::vector<Jet> recover_jets(const NormalDConnection& D, const Point& pt, int k,
                              TorsionConvention convention) {
  const int r = D.r();
  const std::size_t n3 = static_cast<std::size_t>(r) * r * r;
  const GeneralizedAlgebroid& A = D.nlconn().algebroid();
  const auto B = D.eval(pt, k);
  const auto L = A.L().eval(pt, k);
  const double sign = convention == TorsionConvention::plus_structure ? 1.0 : -1.0;
  std::vector<Jet> out(2 * n3);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      for (int c = 0; c < r; ++c) {
        out[D.h(a, b, c)] = B[D.h(a, b, c)] - B[D.h(a, c, b)] + sign * L[A.L_index(a, b, c)];
        out[n3 + D.h(a, b, c)] = B[D.v(a, b, c)] - B[D.v(a, c, b)];
      }
  return out;
}

}  // namespace

TorsionPair recover_torsions(const NormalDConnection& D, TorsionConvention convention) {
  const std::size_t n3 = static_cast<std::size_t>(D.r()) * D.r() * D.r();
  const FieldArray all(
      D.nlconn().field_dims(), 2 * n3,
      [D, convention](const Point& pt, int k) { return recover_jets(D, pt, k, convention); },
      all_variables(D.nlconn().field_dims()));
  auto comps = all.components();
  TorsionPair out;
  out.T.assign(comps.begin(), comps.begin() + n3);
  out.S.assign(comps.begin() + n3, comps.end());
  return out;
}

std::vector<double> recovered_torsions_at(const NormalDConnection& D, const Point& pt,
                                          TorsionConvention convention) {
  return values(recover_jets(D, pt, 0, convention));
}

MetricStructure build_gl_space(const FieldArray& g, int r, std::span<const Point> probes) {
  require_square(g, r);
  const auto comps = g.components();
  MetricStructure G(r, r, comps, comps);
  for (const auto& pt : probes) inverse_at(G, pt);
  return G;
}

}  // namespace algcalc
