#include "algcalc/algebroid.hpp"

#include <cmath>

#include "algcalc/error.hpp"
#include "algcalc/linalg.hpp"

namespace algcalc {

namespace {

void require_x_only(const FieldArray& a, Dims dims, const char* what) {
  if (a.dependence() & ~x_variables(dims))
    throw DependenceViolation(std::string(what) + " must depend on x only");
}

void check_section(const GeneralizedAlgebroid& A, const Section& X) {
  if (static_cast<int>(X.Z.size()) != A.p() || static_cast<int>(X.Y.size()) != A.r())
    throw DimensionMismatch("section has " + std::to_string(X.Z.size()) + "+" +
                            std::to_string(X.Y.size()) + " components, expected " +
                            std::to_string(A.p()) + "+" + std::to_string(A.r()));
  for (const auto* v : {&X.Z, &X.Y})
    for (const auto& f : *v)
      if (!(f.dims() == A.field_dims())) throw DimensionMismatch("section field dimensions");
}

// rho-tilde(X)(f) from jets: Z and Y at order k, f at order k + 1.
Jet anchor_action_jet(const GeneralizedAlgebroid& A, const Derivations& d,
                      const std::vector<Jet>& Z, const std::vector<Jet>& Y, const Jet& f) {
  Jet out(f.nvars(), f.order() - 1);
  for (int a = 0; a < A.p(); ++a) out += Z[a] * anchor_derivation(A, d, a, f);
  for (int b = 0; b < A.r(); ++b) out += Y[b] * fiber_partial(A, d, b, f);
  return out;
}

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

DependenceMask section_deps(const Section& X) {
  return union_dependence(X.Z) | union_dependence(X.Y);
}

}  // namespace

GeneralizedAlgebroid::GeneralizedAlgebroid(int m, int p, int r, FieldArray rho, FieldArray L)
    : m_(m), p_(p), r_(r), rho_(std::move(rho)), L_(std::move(L)) {
  if (m < 1) throw DimensionMismatch("base dimension m must be at least 1");
  if (p < 1) throw DimensionMismatch("algebroid rank p must be at least 1");
  if (r < 0) throw DimensionMismatch("fiber dimension r must be non-negative");
  if (rho_.size() != static_cast<std::size_t>(p) * m)
    throw DimensionMismatch("anchor must have p*m components");
  if (L_.size() != static_cast<std::size_t>(p) * p * p)
    throw DimensionMismatch("structure functions must have p^3 components");
  if (!(rho_.dims() == field_dims()) || !(L_.dims() == field_dims()))
    throw DimensionMismatch("algebroid fields have wrong dimensions");
  require_x_only(rho_, field_dims(), "anchor");
  require_x_only(L_, field_dims(), "structure functions");
}

GeneralizedAlgebroid::GeneralizedAlgebroid(int m, int p, int r, std::vector<ScalarField> rho,
                                           std::vector<ScalarField> L)
    : GeneralizedAlgebroid(m, p, r, FieldArray::from_fields({m, r}, std::move(rho)),
                           FieldArray::from_fields({m, r}, std::move(L))) {}

GeneralizedAlgebroid GeneralizedAlgebroid::standard(int m, int r) {
  const Dims d{m, r};
  std::vector<ScalarField> rho;
  for (int a = 0; a < m; ++a)
    for (int i = 0; i < m; ++i) rho.push_back(ScalarField::constant(d, a == i ? 1.0 : 0.0));
  std::vector<ScalarField> L(static_cast<std::size_t>(m) * m * m, ScalarField::zero(d));
  return GeneralizedAlgebroid(m, m, r, std::move(rho), std::move(L));
}

GeneralizedAlgebroid GeneralizedAlgebroid::with_fiber_chart(FieldArray N, FieldArray N_inv) const {
  const std::size_t rr = static_cast<std::size_t>(r_) * r_;
  if (N.size() != rr || N_inv.size() != rr) throw DimensionMismatch("fiber chart must be r x r");
  require_x_only(N, field_dims(), "fiber chart");
  require_x_only(N_inv, field_dims(), "fiber chart inverse");
  GeneralizedAlgebroid out = *this;
  out.chart_ = std::make_shared<const Chart>(Chart{std::move(N), std::move(N_inv)});
  return out;
}

Derivations derivations(const GeneralizedAlgebroid& A, const Point& pt, int order) {
  Derivations d;
  d.order = order;
  d.rho = A.rho().eval(pt, order);
  if (A.reference_chart()) return d;
  const int m = A.m(), p = A.p(), r = A.r();
  const auto n_inv = A.fiber_chart_inverse()->eval(pt, order + 1);
  const auto N = A.fiber_chart()->eval(pt, order);
  d.n_inv = truncate_all(n_inv, order);
  const Dims dims = A.field_dims();
  const int nv = dims.nvars();
  // ybar^c = N^c_d y^d
  std::vector<Jet> ybar(r, Jet(nv, order));
  for (int c = 0; c < r; ++c)
    for (int e = 0; e < r; ++e) ybar[c] += N[c * r + e] * coordinate_jet(dims, pt, m + e, order);
  d.drift.assign(static_cast<std::size_t>(p) * r, Jet(nv, order));
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < r; ++b) {
      Jet s(nv, order);
      for (int c = 0; c < r; ++c) {
        Jet dn(nv, order);
        for (int i = 0; i < m; ++i) dn += d.rho[A.rho_index(a, i)] * n_inv[b * r + c].partial(i);
        s += dn * ybar[c];
      }
      d.drift[a * r + b] = s;
    }
  return d;
}

Jet anchor_derivation(const GeneralizedAlgebroid& A, const Derivations& d, int alpha, const Jet& f) {
  if (alpha < 0 || alpha >= A.p()) throw IndexOutOfRange("horizontal index out of range");
  const int m = A.m();
  Jet out(f.nvars(), f.order() - 1);
  for (int i = 0; i < m; ++i) out += d.rho[A.rho_index(alpha, i)] * f.partial(i);
  if (!d.drift.empty())
    for (int b = 0; b < A.r(); ++b) out += d.drift[alpha * A.r() + b] * f.partial(m + b);
  return out;
}

Jet fiber_partial(const GeneralizedAlgebroid& A, const Derivations& d, int a, const Jet& f) {
  if (a < 0 || a >= A.r()) throw IndexOutOfRange("vertical index out of range");
  const int m = A.m(), r = A.r();
  if (d.n_inv.empty()) return f.partial(m + a);
  Jet out(f.nvars(), f.order() - 1);
  for (int b = 0; b < r; ++b) out += d.n_inv[b * r + a] * f.partial(m + b);
  return out;
}

std::vector<Jet> fiber_coordinates(const GeneralizedAlgebroid& A, const Point& pt, int order) {
  const Dims dims = A.field_dims();
  const int m = A.m(), r = A.r();
  std::vector<Jet> y;
  for (int a = 0; a < r; ++a) y.push_back(coordinate_jet(dims, pt, m + a, order));
  if (A.reference_chart()) return y;
  const auto N = A.fiber_chart()->eval(pt, order);
  std::vector<Jet> out(r, Jet(dims.nvars(), order));
  for (int c = 0; c < r; ++c)
    for (int e = 0; e < r; ++e) out[c] += N[c * r + e] * y[e];
  return out;
}

Section basis_section(const GeneralizedAlgebroid& A, int index) {
  if (index < 0 || index >= A.p() + A.r()) throw IndexOutOfRange("basis section index");
  const Dims d = A.field_dims();
  Section s;
  for (int a = 0; a < A.p(); ++a) s.Z.push_back(ScalarField::constant(d, a == index ? 1.0 : 0.0));
  for (int b = 0; b < A.r(); ++b)
    s.Y.push_back(ScalarField::constant(d, A.p() + b == index ? 1.0 : 0.0));
  return s;
}

void check_frame(const FrameDiffeoData& F, std::span<const Point> probes, double tol) {
  const int m = F.m;
  if (F.theta.size() != static_cast<std::size_t>(m) * m ||
      F.theta_inv.size() != static_cast<std::size_t>(m) * m)
    throw DimensionMismatch("frame data must be m x m (the frame construction needs p = m)");
  for (const auto& p : probes) {
    std::vector<double> th(m * m), ti(m * m);
    for (int i = 0; i < m * m; ++i) {
      th[i] = F.theta[i].value(p);
      ti[i] = F.theta_inv[i].value(p);
    }
    std::vector<double> inv;
    if (!try_invert(th, m, inv)) throw SingularFrame("frame is singular at " + to_string(p));
    const double defect = max_abs_identity_defect(matmul(th, ti, m), m);
    if (!(defect <= tol))
      throw SingularFrame("theta_inv is not the inverse of theta at " + to_string(p) +
                          " (defect " + std::to_string(defect) + ")");
  }
}

FieldArray from_frame(const FrameDiffeoData& F, std::span<const Point> probes) {
  const int m = F.m;
  const Dims dims{m, F.r};
  if (F.theta.size() != static_cast<std::size_t>(m) * m ||
      F.theta_inv.size() != static_cast<std::size_t>(m) * m)
    throw DimensionMismatch("frame data must be m x m (the frame construction needs p = m)");
  for (const auto* v : {&F.theta, &F.theta_inv})
    for (const auto& f : *v) {
      if (!(f.dims() == dims)) throw DimensionMismatch("frame field dimensions");
      if (!f.x_only()) throw DependenceViolation("frame fields must depend on x only");
    }
  check_frame(F, probes);
  auto theta = F.theta;
  auto theta_inv = F.theta_inv;
  const DependenceMask deps = union_dependence(theta) | union_dependence(theta_inv);
  return FieldArray(
      dims, static_cast<std::size_t>(m) * m * m,
      [m, theta, theta_inv](const Point& pt, int k) {
        const auto th = eval_all(theta, pt, k + 1);
        const auto ti = eval_all(theta_inv, pt, k);
        const int n = th[0].nvars();
        // c[(a*m + b)*m + j] = theta_a(theta^j_b) - theta_b(theta^j_a)
        std::vector<Jet> c(static_cast<std::size_t>(m) * m * m, Jet(n, k));
        for (int a = 0; a < m; ++a)
          for (int b = a + 1; b < m; ++b)
            for (int j = 0; j < m; ++j) {
              Jet s(n, k);
              for (int i = 0; i < m; ++i)
                s += th[a * m + i].truncated(k) * th[b * m + j].partial(i) -
                     th[b * m + i].truncated(k) * th[a * m + j].partial(i);
              c[(a * m + b) * m + j] = s;
              c[(b * m + a) * m + j] = -s;
            }
        std::vector<Jet> L(static_cast<std::size_t>(m) * m * m, Jet(n, k));
        for (int g = 0; g < m; ++g)
          for (int a = 0; a < m; ++a)
            for (int b = a + 1; b < m; ++b) {
              Jet s(n, k);
              for (int j = 0; j < m; ++j) s += c[(a * m + b) * m + j] * ti[j * m + g];
              L[(g * m + a) * m + b] = s;
              L[(g * m + b) * m + a] = -s;
            }
        return L;
      },
      deps);
}

GeneralizedAlgebroid algebroid_from_frame(const FrameDiffeoData& F, std::span<const Point> probes) {
  FieldArray L = from_frame(F, probes);
  return GeneralizedAlgebroid(F.m, F.m, F.r, FieldArray::from_fields({F.m, F.r}, F.theta),
                              std::move(L));
}

ValidationReport validate_structure(const GeneralizedAlgebroid& A, std::span<const Point> pts,
                                    double tol, unsigned threads) {
  const int m = A.m(), p = A.p();
  struct PerPoint {
    double antisym = 0.0, anchor = 0.0;
  };
  auto per = parallel_map(pts.size(), threads, [&](std::size_t idx) {
    const Point& pt = pts[idx];
    const auto rho = A.rho().eval(pt, 1);
    const auto L = A.L().eval(pt, 0);
    PerPoint out;
    for (int g = 0; g < p; ++g)
      for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b)
          out.antisym = std::max(out.antisym, std::fabs(L[A.L_index(g, a, b)].value() +
                                                        L[A.L_index(g, b, a)].value()));
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int k = 0; k < m; ++k) {
          double lhs = 0.0, rhs = 0.0;
          for (int g = 0; g < p; ++g)
            lhs += L[A.L_index(g, a, b)].value() * rho[A.rho_index(g, k)].value();
          for (int i = 0; i < m; ++i)
            rhs += rho[A.rho_index(a, i)].value() * rho[A.rho_index(b, k)].d(i) -
                   rho[A.rho_index(b, i)].value() * rho[A.rho_index(a, k)].d(i);
          out.anchor = std::max(out.anchor, std::fabs(lhs - rhs));
        }
    return out;
  });
  std::vector<double> antisym, anchor;
  for (const auto& v : per) {
    antisym.push_back(v.antisym);
    anchor.push_back(v.anchor);
  }
  ValidationReport rep;
  rep.points = pts.size();
  rep.add(make_residual("structure.antisymmetry", antisym, pts, tol));
  rep.add(make_residual("structure.anchor_compatibility", anchor, pts, tol));
  return rep;
}

ScalarField anchor_action(const GeneralizedAlgebroid& A, const Section& X, const ScalarField& f) {
  check_section(A, X);
  if (!(f.dims() == A.field_dims())) throw DimensionMismatch("function has wrong dimensions");
  const DependenceMask deps = f.dependence() | section_deps(X) | A.rho().dependence();
  return ScalarField(A.field_dims(), deps, [A, X, f](const Point& pt, int k) {
    const auto d = derivations(A, pt, k);
    return anchor_action_jet(A, d, eval_all(X.Z, pt, k), eval_all(X.Y, pt, k), f.eval(pt, k + 1));
  });
}

namespace {

// Bracket components at order k from section components at order k + 1.
std::vector<Jet> bracket_kernel(const GeneralizedAlgebroid& A, const Derivations& rho,
                                const std::vector<Jet>& L, const std::vector<Jet>& Z1,
                                const std::vector<Jet>& Y1, const std::vector<Jet>& Z2,
                                const std::vector<Jet>& Y2, int k) {
  const int p = A.p(), r = A.r();
  const auto z1 = truncate_all(Z1, k), z2 = truncate_all(Z2, k);
  const auto y1 = truncate_all(Y1, k), y2 = truncate_all(Y2, k);
  const int n = A.field_dims().nvars();
  std::vector<Jet> out;
  out.reserve(p + r);
  for (int g = 0; g < p; ++g) {
    Jet s(n, k);
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) s += z1[a] * z2[b] * L[A.L_index(g, a, b)];
    s += anchor_action_jet(A, rho, z1, y1, Z2[g]);
    s -= anchor_action_jet(A, rho, z2, y2, Z1[g]);
    out.push_back(std::move(s));
  }
  for (int b = 0; b < r; ++b)
    out.push_back(anchor_action_jet(A, rho, z1, y1, Y2[b]) - anchor_action_jet(A, rho, z2, y2, Y1[b]));
  return out;
}

}  // namespace

Section bracket(const GeneralizedAlgebroid& A, const Section& X1, const Section& X2) {
  check_section(A, X1);
  check_section(A, X2);
  const int p = A.p(), r = A.r();
  const DependenceMask deps =
      section_deps(X1) | section_deps(X2) | A.rho().dependence() | A.L().dependence();
  FieldArray arr(
      A.field_dims(), static_cast<std::size_t>(p + r),
      [A, X1, X2](const Point& pt, int k) {
        return bracket_kernel(A, derivations(A, pt, k), A.L().eval(pt, k), eval_all(X1.Z, pt, k + 1),
                              eval_all(X1.Y, pt, k + 1), eval_all(X2.Z, pt, k + 1),
                              eval_all(X2.Y, pt, k + 1), k);
      },
      deps);
  Section s;
  for (int g = 0; g < p; ++g) s.Z.push_back(arr.component(g));
  for (int b = 0; b < r; ++b) s.Y.push_back(arr.component(p + b));
  return s;
}

double jacobi_residual(const GeneralizedAlgebroid& A, std::span<const Point> pts, int i, int j,
                       int k, unsigned threads) {
  const int p = A.p(), r = A.r(), n = A.field_dims().nvars();
  for (int q : {i, j, k})
    if (q < 0 || q >= p + r) throw IndexOutOfRange("basis section index out of range");
  // Constant basis sections as order-2 jets; inner brackets at order 1, outer at order 0.
  auto basis = [&](int q, std::vector<Jet>& Z, std::vector<Jet>& Y) {
    Z.assign(p, Jet(n, 2));
    Y.assign(r, Jet(n, 2));
    if (q < p) Z[q] = Jet(n, 2, 1.0);
    else Y[q - p] = Jet(n, 2, 1.0);
  };
  auto per = parallel_map(pts.size(), threads, [&](std::size_t idx) {
    const Point& pt = pts[idx];
    const Derivations d1 = derivations(A, pt, 1), d0 = derivations(A, pt, 0);
    const auto L1 = A.L().eval(pt, 1);
    const auto L0 = truncate_all(L1, 0);
    std::vector<Jet> Z[3], Y[3];
    const int ids[3] = {i, j, k};
    for (int q = 0; q < 3; ++q) basis(ids[q], Z[q], Y[q]);
    std::vector<Jet> total;
    for (int c = 0; c < 3; ++c) {
      const int a = c, b = (c + 1) % 3, e = (c + 2) % 3;
      const auto inner = bracket_kernel(A, d1, L1, Z[a], Y[a], Z[b], Y[b], 1);
      const std::vector<Jet> iz(inner.begin(), inner.begin() + p), iy(inner.begin() + p, inner.end());
      const auto outer = bracket_kernel(A, d0, L0, iz, iy, truncate_all(Z[e], 1), truncate_all(Y[e], 1), 0);
      if (total.empty()) total = outer;
      else
        for (std::size_t t = 0; t < total.size(); ++t) total[t] += outer[t];
    }
    double worst = 0.0;
    for (const auto& t : total) {
      const double v = std::fabs(t.value());
      if (std::isnan(v) || v > worst) worst = v;
    }
    return worst;
  });
  return reduce_max(per).value;
}

double jacobi_residual(const GeneralizedAlgebroid& A, std::span<const Point> pts, unsigned threads) {
  const int n = A.p() + A.r();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const double v = jacobi_residual(A, pts, i, j, k, threads);
        if (std::isnan(v) || v > worst) worst = v;
        if (std::isnan(worst)) return worst;
      }
  return worst;
}

}  // namespace algcalc
