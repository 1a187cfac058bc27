#include "algcalc/metric.hpp"

#include <cmath>

#include "algcalc/error.hpp"
#include "algcalc/linalg.hpp"

namespace algcalc {

namespace {

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

const IndexSignature& sig_hh() {
  static const IndexSignature s({{Family::H, Variance::Co}, {Family::H, Variance::Co}});
  return s;
}
const IndexSignature& sig_vv() {
  static const IndexSignature s({{Family::V, Variance::Co}, {Family::V, Variance::Co}});
  return s;
}

std::vector<Jet> invert_or_throw(const std::vector<Jet>& g, int n, const Point& pt, const char* block) {
  std::vector<Jet> inv;
  if (!try_invert(g, n, inv))
    throw SingularMetric(std::string("metric block ") + block + " is singular at " + to_string(pt));
  return inv;
}

void check_pair(const DConnection& D, const MetricStructure& G) {
  if (D.p() != G.p() || D.r() != G.r() || !(D.field_dims() == G.field_dims()))
    throw DimensionMismatch("metric and connection dimensions differ");
}

// Everything the constructions need at one point, with derivative inputs one order higher.
struct MetricPoint {
  AdaptedDerivations ad;
  std::vector<Jet> gh1, gv1, gh, gv, ghi, gvi;
};

MetricPoint metric_point(const MetricStructure& G, const NonlinearConnection& C, const Point& pt, int k) {
  MetricPoint mp{adapted_derivations(C, pt, k), G.h().eval(pt, k + 1), G.v().eval(pt, k + 1), {}, {}, {}, {}};
  mp.gh = truncate_all(mp.gh1, k);
  mp.gv = truncate_all(mp.gv1, k);
  mp.ghi = invert_or_throw(mp.gh, G.p(), pt, "h");
  mp.gvi = invert_or_throw(mp.gv, G.r(), pt, "v");
  return mp;
}

}  // namespace

FieldArray symmetric_array(const std::vector<ScalarField>& full, int n) {
  if (full.size() != static_cast<std::size_t>(n) * n) throw DimensionMismatch("metric block must be n x n");
  if (full.empty()) throw DimensionMismatch("empty metric block");
  const Dims d = full.front().dims();
  std::vector<ScalarField> upper;
  DependenceMask deps = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (!(full[i * n + j].dims() == d)) throw DimensionMismatch("metric field dimensions");
      upper.push_back(full[i * n + j]);
      deps |= full[i * n + j].dependence();
    }
  return FieldArray(
      d, full.size(),
      [upper, n](const Point& pt, int k) {
        std::vector<Jet> out(static_cast<std::size_t>(n) * n);
        std::size_t u = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            out[i * n + j] = upper[u++].eval(pt, k);
            if (j != i) out[j * n + i] = out[i * n + j];
          }
        return out;
      },
      deps);
}

MetricStructure::MetricStructure(int p, int r, const std::vector<ScalarField>& gH,
                                 const std::vector<ScalarField>& gV, bool h_riemannian,
                                 bool v_riemannian)
    : p_(p), r_(r), gh_(symmetric_array(gH, p)), gv_(symmetric_array(gV, r)),
      h_riemannian_(h_riemannian), v_riemannian_(v_riemannian) {
  if (!(gh_.dims() == gv_.dims())) throw DimensionMismatch("metric blocks have different dimensions");
}

DTensorField MetricStructure::h_tensor() const { return DTensorField(p_, r_, sig_hh(), gh_); }
DTensorField MetricStructure::v_tensor() const { return DTensorField(p_, r_, sig_vv(), gv_); }

MetricJets metric_jets(const MetricStructure& G, const Point& pt, int order, int inverse_order) {
  MetricJets mj{G.h().eval(pt, order), G.v().eval(pt, order), {}, {}};
  mj.h_inv = invert_or_throw(truncate_all(mj.h, inverse_order), G.p(), pt, "h");
  mj.v_inv = invert_or_throw(truncate_all(mj.v, inverse_order), G.r(), pt, "v");
  return mj;
}

InverseCache inverse_at(const MetricStructure& G, const Point& pt) {
  InverseCache c;
  auto block = [&](const FieldArray& a, int n, const char* name, std::vector<double>& inv) {
    std::vector<double> g;
    for (const auto& j : a.eval(pt, 0)) g.push_back(j.value());
    if (!try_invert(g, n, inv))
      throw SingularMetric(std::string("metric block ") + name + " is singular at " + to_string(pt));
    c.residual = std::max(c.residual, max_abs_identity_defect(matmul(g, inv, n), n));
  };
  block(G.h(), G.p(), "h", c.h_inv);
  block(G.v(), G.r(), "v", c.v_inv);
  return c;
}

ValidationReport validate_metric(const MetricStructure& G, std::span<const Point> pts, double tol,
                                 unsigned threads) {
  const int p = G.p(), r = G.r(), m = G.field_dims().m;
  struct PerPoint {
    double inverse = 0.0, h_y = 0.0, v_y = 0.0;
    Inertia ih, iv;
  };
  auto per = parallel_map(pts.size(), threads, [&](std::size_t idx) {
    const Point& pt = pts[idx];
    PerPoint out;
    out.inverse = inverse_at(G, pt).residual;
    const auto gh = G.h().eval(pt, 1), gv = G.v().eval(pt, 1);
    std::vector<double> h, v;
    for (const auto& j : gh) h.push_back(j.value());
    for (const auto& j : gv) v.push_back(j.value());
    out.ih = inertia(h, p);
    out.iv = inertia(v, r);
    for (int a = 0; a < r; ++a) {
      for (const auto& j : gh) out.h_y = std::max(out.h_y, std::fabs(j.d(m + a)));
      for (const auto& j : gv) out.v_y = std::max(out.v_y, std::fabs(j.d(m + a)));
    }
    return out;
  });
  std::vector<double> inv, sig, hy, vy;
  for (const auto& v : per) {
    inv.push_back(v.inverse);
    const bool same = v.ih.positive == per[0].ih.positive && v.ih.negative == per[0].ih.negative &&
                      v.iv.positive == per[0].iv.positive && v.iv.negative == per[0].iv.negative;
    sig.push_back(same ? 0.0 : 1.0);
    hy.push_back(v.h_y);
    vy.push_back(v.v_y);
  }
  ValidationReport rep;
  rep.points = pts.size();
  rep.add(make_residual("metric.inverse_residual", inv, pts, tol));
  rep.add(make_residual("metric.signature_changes", sig, pts, 0.0));
  if (G.h_riemannian()) rep.add(make_residual("metric.h_riemannian_y_partials", hy, pts, 0.0));
  if (G.v_riemannian()) rep.add(make_residual("metric.v_riemannian_y_partials", vy, pts, 0.0));
  return rep;
}

ValidationReport metrizability_residual(const DConnection& D, const MetricStructure& G,
                                        std::span<const Point> pts, double tol, unsigned threads) {
  check_pair(D, G);
  auto per = parallel_map(pts.size(), threads, [&](std::size_t idx) {
    const Point& pt = pts[idx];
    const auto B = D.eval(pt, 0);
    const auto ad = adapted_derivations(D.nlconn(), pt, 0);
    const auto gh = G.h().eval(pt, 1), gv = G.v().eval(pt, 1);
    const std::vector<Jet> parts[4] = {h_cov_kernel(D, B, ad, sig_hh(), gh),
                                       h_cov_kernel(D, B, ad, sig_vv(), gv),
                                       v_cov_kernel(D, B, ad, sig_hh(), gh),
                                       v_cov_kernel(D, B, ad, sig_vv(), gv)};
    std::array<double, 4> out{};
    for (int q = 0; q < 4; ++q)
      for (const auto& j : parts[q]) {
        const double a = std::fabs(j.value());
        if (std::isnan(a) || a > out[q]) out[q] = a;
      }
    return out;
  });
  ValidationReport rep;
  rep.points = pts.size();
  for (int q = 0; q < 4; ++q) {
    std::vector<double> vals;
    for (const auto& v : per) vals.push_back(v[q]);
    rep.add(make_residual(kMetrizabilityNames[q], vals, pts, tol));
  }
  return rep;
}

DConnection canonical_dconnection(const MetricStructure& G, const DConnection& base) {
  check_pair(base, G);
  const int p = G.p(), r = G.r();
  const DConnectionLayout Lay = base.layout();
  const int nv = G.field_dims().nvars();
  FieldArray blocks(
      G.field_dims(), Lay.size(),
      [G, base, Lay, p, r, nv](const Point& pt, int k) {
        const NonlinearConnection& C = base.nlconn();
        const GeneralizedAlgebroid& A = C.algebroid();
        const MetricPoint mp = metric_point(G, C, pt, k);
        const auto B = base.eval(pt, k);
        const auto L = A.L().eval(pt, k);
        const Jet zero(nv, k);
        std::vector<Jet> out(Lay.size(), zero);
        // dg[(a*p + b)*p + c] = delta_c g_{ab}
        std::vector<Jet> dg(static_cast<std::size_t>(p) * p * p);
        for (int a = 0; a < p; ++a)
          for (int b = a; b < p; ++b)
            for (int c = 0; c < p; ++c) {
              dg[(a * p + b) * p + c] = delta_jet(C, mp.ad, c, mp.gh1[a * p + b]);
              dg[(b * p + a) * p + c] = dg[(a * p + b) * p + c];
            }
        auto gh = [&](int a, int b) -> const Jet& { return mp.gh[a * p + b]; };
        auto Lf = [&](int g, int a, int b) -> const Jet& { return L[A.L_index(g, a, b)]; };
        // Lowered Christoffel-type combination, then raised.
        std::vector<Jet> low(static_cast<std::size_t>(p) * p * p, zero);
        for (int e = 0; e < p; ++e)
          for (int b = 0; b < p; ++b)
            for (int c = 0; c < p; ++c) {
              Jet s = dg[(e * p + b) * p + c] + dg[(e * p + c) * p + b] - dg[(b * p + c) * p + e];
              for (int t = 0; t < p; ++t)
                s += gh(t, e) * Lf(t, c, b) - gh(b, t) * Lf(t, c, e) - gh(t, c) * Lf(t, b, e);
              low[(e * p + b) * p + c] = std::move(s);
            }
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b)
            for (int c = 0; c < p; ++c) {
              Jet s = zero;
              for (int e = 0; e < p; ++e) s += mp.ghi[a * p + e] * low[(e * p + b) * p + c];
              out[Lay.hh(a, b, c)] = 0.5 * s;
            }
        const auto gv_h = h_cov_kernel(base, B, mp.ad, sig_vv(), mp.gv1);  // [b][c][gamma]
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            for (int g = 0; g < p; ++g) {
              Jet s = zero;
              for (int c = 0; c < r; ++c) s += mp.gvi[a * r + c] * gv_h[(b * r + c) * p + g];
              out[Lay.hv(a, b, g)] = B[Lay.hv(a, b, g)] + 0.5 * s;
            }
        const auto gh_v = v_cov_kernel(base, B, mp.ad, sig_hh(), mp.gh1);  // [beta][eps][c]
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b)
            for (int c = 0; c < r; ++c) {
              Jet s = zero;
              for (int e = 0; e < p; ++e) s += mp.ghi[a * p + e] * gh_v[(b * p + e) * r + c];
              out[Lay.vh(a, b, c)] = B[Lay.vh(a, b, c)] + 0.5 * s;
            }
        std::vector<Jet> dv(static_cast<std::size_t>(r) * r * r);  // [(e*r + b)*r + c] = d_c g_{eb}
        for (int e = 0; e < r; ++e)
          for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) dv[(e * r + b) * r + c] = vertical_jet(C, mp.ad, c, mp.gv1[e * r + b]);
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            for (int c = 0; c < r; ++c) {
              Jet s = zero;
              for (int e = 0; e < r; ++e)
                s += mp.gvi[a * r + e] *
                     (dv[(e * r + b) * r + c] + dv[(e * r + c) * r + b] - dv[(b * r + c) * r + e]);
              out[Lay.vv(a, b, c)] = 0.5 * s;
            }
        return out;
      },
      all_variables(G.field_dims()));
  return DConnection(base.nlconn_ptr(), std::move(blocks));
}

DConnection berwald_base(ConnectionPtr C) {
  const int p = C->p(), r = C->r();
  const DConnectionLayout L{p, r};
  const int nv = C->field_dims().nvars();
  FieldArray blocks(
      C->field_dims(), L.size(),
      [C, L, p, r, nv](const Point& pt, int k) {
        const auto ad = adapted_derivations(*C, pt, k);
        const auto G = C->gamma().eval(pt, k + 1);
        std::vector<Jet> out(L.size(), Jet(nv, k));
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b)
            for (int g = 0; g < p; ++g) out[L.hv(a, b, g)] = vertical_jet(*C, ad, b, G[C->gamma_index(a, g)]);
        return out;
      },
      C->gamma().dependence());
  return DConnection(C, std::move(blocks));
}

DConnection berwald_canonical(const MetricStructure& G, ConnectionPtr C) {
  return canonical_dconnection(G, berwald_base(std::move(C)));
}

namespace {

// O and O* for one block. The pair is built so that O + O* reproduces the Kronecker pattern
// exactly in floating point: O* follows the formula, O is the difference, nudged by an ulp
// where the rounded sum would miss.
void obata_block(const std::vector<double>& g, const std::vector<double>& gi, int n,
                 std::vector<double>& o, std::vector<double>& os) {
  o.assign(static_cast<std::size_t>(n) * n * n * n, 0.0);
  os.assign(o.size(), 0.0);
  for (int a = 0; a < n; ++a)
    for (int e = 0; e < n; ++e)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const std::size_t at = ((static_cast<std::size_t>(a) * n + e) * n + b) * n + c;
          const double dd = (a == b && e == c) ? 1.0 : 0.0;
          const double w = g[b * n + c] * gi[a * n + e];
          const double star = 0.5 * (dd + w);
          double plain = dd - star;
          for (int step = 0; step < 4 && plain + star != dd; ++step)
            plain = std::nextafter(plain, plain + star < dd ? INFINITY : -INFINITY);
          o[at] = plain;
          os[at] = star;
        }
}

// Jet version used inside the deformation; values agree with obata_block up to rounding.
std::vector<Jet> obata_jets(const std::vector<Jet>& g, const std::vector<Jet>& gi, int n, bool star,
                            int nv, int k) {
  std::vector<Jet> o(static_cast<std::size_t>(n) * n * n * n, Jet(nv, k));
  const double sign = star ? 1.0 : -1.0;
  for (int a = 0; a < n; ++a)
    for (int e = 0; e < n; ++e)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const double dd = (a == b && e == c) ? 1.0 : 0.0;
          o[((static_cast<std::size_t>(a) * n + e) * n + b) * n + c] =
              0.5 * (dd + sign * (g[b * n + c] * gi[a * n + e]));
        }
  return o;
}

}  // namespace

ObataPair obata_pair(const MetricStructure& G, const Point& pt) {
  const InverseCache inv = inverse_at(G, pt);
  ObataPair out;
  out.p = G.p();
  out.r = G.r();
  std::vector<double> h, v;
  for (const auto& j : G.h().eval(pt, 0)) h.push_back(j.value());
  for (const auto& j : G.v().eval(pt, 0)) v.push_back(j.value());
  obata_block(h, inv.h_inv, G.p(), out.h, out.h_star);
  obata_block(v, inv.v_inv, G.r(), out.v, out.v_star);
  return out;
}

DConnection obata_deform(const MetricStructure& G, const ObataTensors& XY, ConnectionPtr C,
                         ObataConvention convention) {
  const int p = G.p(), r = G.r();
  const std::size_t P = p, R = r;
  if (XY.xh.size() != P * P * P || XY.xv.size() != P * P * R || XY.yh.size() != R * R * P ||
      XY.yv.size() != R * R * R)
    throw DimensionMismatch("Obata tensors must have shapes p^3, p^2 r, r^2 p, r^3");
  const DConnection base = berwald_canonical(G, C);
  const DConnectionLayout Lay = base.layout();
  const Dims dims = G.field_dims();
  const int nv = dims.nvars();
  std::vector<ScalarField> all;
  for (const auto* v : {&XY.xh, &XY.xv, &XY.yh, &XY.yv}) all.insert(all.end(), v->begin(), v->end());
  const FieldArray xy = FieldArray::from_fields(dims, std::move(all));
  const bool swapped = convention == ObataConvention::swapped;
  FieldArray blocks(
      dims, Lay.size(),
      [G, base, xy, Lay, p, r, P, R, nv, swapped](const Point& pt, int k) {
        auto out = base.eval(pt, k);
        const MetricJets mj = metric_jets(G, pt, k, k);
        const auto t = xy.eval(pt, k);
        const Jet* xh = t.data();
        const Jet* xv = xh + P * P * P;
        const Jet* yh = xv + P * P * R;
        const Jet* yv = yh + R * R * P;
        const auto Oh = obata_jets(mj.h, mj.h_inv, p, false, nv, k);
        const auto Ov = obata_jets(mj.v, mj.v_inv, r, false, nv, k);
        const auto Osh = obata_jets(mj.h, mj.h_inv, p, true, nv, k);
        const auto Osv = obata_jets(mj.v, mj.v_inv, r, true, nv, k);
        auto O4 = [](const std::vector<Jet>& o, int n, int a, int e, int b, int c) -> const Jet& {
          return o[((static_cast<std::size_t>(a) * n + e) * n + b) * n + c];
        };
        // X tensors stored [upper][lower][lower] with the last index of extent `last`.
        auto X3 = [](const Jet* x, int n, int last, int u, int l, int c) -> const Jet& {
          return x[(static_cast<std::size_t>(u) * n + l) * last + c];
        };
        // Hh and Vh (family H, last index over p or r).
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b) {
            for (int g = 0; g < p; ++g) {
              Jet s(nv, k);
              for (int e = 0; e < p; ++e)
                for (int h = 0; h < p; ++h)
                  s += swapped ? O4(Oh, p, a, e, g, h) * X3(xh, p, p, h, e, b)
                               : O4(Oh, p, a, e, h, b) * X3(xh, p, p, h, e, g);
              out[Lay.hh(a, b, g)] += s;
            }
            for (int c = 0; c < r; ++c) {
              Jet s(nv, k);
              for (int e = 0; e < p; ++e)
                for (int h = 0; h < p; ++h)
                  s += swapped ? O4(Osh, p, a, e, b, h) * X3(xv, p, r, h, e, c)
                               : O4(Oh, p, a, e, h, b) * X3(xv, p, r, h, e, c);
              out[Lay.vh(a, b, c)] += s;
            }
          }
        // Hv and Vv (family V).
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) {
            for (int g = 0; g < p; ++g) {
              Jet s(nv, k);
              for (int e = 0; e < r; ++e)
                for (int d = 0; d < r; ++d)
                  s += swapped ? O4(Ov, r, a, e, b, d) * X3(yh, r, p, d, e, g)
                               : O4(Ov, r, a, e, d, b) * X3(yh, r, p, d, e, g);
              out[Lay.hv(a, b, g)] += s;
            }
            for (int c = 0; c < r; ++c) {
              Jet s(nv, k);
              for (int e = 0; e < r; ++e)
                for (int d = 0; d < r; ++d)
                  s += swapped ? O4(Osv, r, a, e, b, d) * X3(yv, r, r, d, e, c)
                               : O4(Ov, r, a, e, d, b) * X3(yv, r, r, d, e, c);
              out[Lay.vv(a, b, c)] += s;
            }
          }
        return out;
      },
      all_variables(dims));
  return DConnection(base.nlconn_ptr(), std::move(blocks));
}

DConnection base_deform(const MetricStructure& G, const DConnection& base) {
  check_pair(base, G);
  const int p = G.p(), r = G.r();
  const DConnectionLayout Lay = base.layout();
  const int nv = G.field_dims().nvars();
  FieldArray blocks(
      G.field_dims(), Lay.size(),
      [G, base, Lay, p, r, nv](const Point& pt, int k) {
        const MetricPoint mp = metric_point(G, base.nlconn(), pt, k);
        auto out = base.eval(pt, k);
        const auto hh = h_cov_kernel(base, out, mp.ad, sig_hh(), mp.gh1);  // [b][e][g]
        const auto vh = h_cov_kernel(base, out, mp.ad, sig_vv(), mp.gv1);
        const auto hv = v_cov_kernel(base, out, mp.ad, sig_hh(), mp.gh1);  // [b][e][c]
        const auto vv = v_cov_kernel(base, out, mp.ad, sig_vv(), mp.gv1);
        const Jet zero(nv, k);
        for (int a = 0; a < p; ++a)
          for (int b = 0; b < p; ++b) {
            for (int g = 0; g < p; ++g) {
              Jet s = zero;
              for (int e = 0; e < p; ++e) s += mp.ghi[a * p + e] * hh[(b * p + e) * p + g];
              out[Lay.hh(a, b, g)] += 0.5 * s;
            }
            for (int c = 0; c < r; ++c) {
              Jet s = zero;
              for (int e = 0; e < p; ++e) s += mp.ghi[a * p + e] * hv[(b * p + e) * r + c];
              out[Lay.vh(a, b, c)] += 0.5 * s;
            }
          }
        for (int a = 0; a < r; ++a)
          for (int b = 0; b < r; ++b) {
            for (int g = 0; g < p; ++g) {
              Jet s = zero;
              for (int e = 0; e < r; ++e) s += mp.gvi[a * r + e] * vh[(b * r + e) * p + g];
              out[Lay.hv(a, b, g)] += 0.5 * s;
            }
            for (int c = 0; c < r; ++c) {
              Jet s = zero;
              for (int e = 0; e < r; ++e) s += mp.gvi[a * r + e] * vv[(b * r + e) * r + c];
              out[Lay.vv(a, b, c)] += 0.5 * s;
            }
          }
        return out;
      },
      all_variables(G.field_dims()));
  return DConnection(base.nlconn_ptr(), std::move(blocks));
}

}  // namespace algcalc
