#include "algcalc/nlconn.hpp"

#include <cmath>

#include "algcalc/error.hpp"
#include "algcalc/linalg.hpp"

namespace algcalc {

namespace {

void require_x_only(const FieldArray& a, Dims dims, const char* what) {
  if (a.dependence() & ~x_variables(dims))
    throw DependenceViolation(std::string(what) + " must depend on x only");
}

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

// C = A * B for n x n jet matrices.
FieldArray product_array(const FieldArray& a, const FieldArray& b, int n) {
  return FieldArray(
      a.dims(), static_cast<std::size_t>(n) * n,
      [a, b, n](const Point& pt, int k) {
        const auto x = a.eval(pt, k), y = b.eval(pt, k);
        std::vector<Jet> out(static_cast<std::size_t>(n) * n, Jet(a.dims().nvars(), k));
        for (int i = 0; i < n; ++i)
          for (int l = 0; l < n; ++l)
            for (int j = 0; j < n; ++j) out[i * n + j] += x[i * n + l] * y[l * n + j];
        return out;
      },
      a.dependence() | b.dependence());
}

}  // namespace

NonlinearConnection::NonlinearConnection(AlgebroidPtr A, FieldArray gamma)
    : A_(std::move(A)), gamma_(std::move(gamma)) {
  if (!A_) throw DimensionMismatch("nonlinear connection needs an algebroid");
  if (gamma_.size() != static_cast<std::size_t>(A_->r()) * A_->p())
    throw DimensionMismatch("connection coefficients must be r x p");
  if (!(gamma_.dims() == A_->field_dims()))
    throw DimensionMismatch("connection coefficients have wrong dimensions");
}

NonlinearConnection::NonlinearConnection(AlgebroidPtr A, std::vector<ScalarField> gamma)
    : NonlinearConnection(A, FieldArray::from_fields(A ? A->field_dims() : Dims{},
                                                     std::move(gamma))) {}

NonlinearConnection NonlinearConnection::zero(AlgebroidPtr A) {
  std::vector<ScalarField> g(static_cast<std::size_t>(A->r()) * A->p(),
                             ScalarField::zero(A->field_dims()));
  return NonlinearConnection(A, std::move(g));
}

NonlinearConnection from_ehresmann(AlgebroidPtr A, const std::vector<ScalarField>& ehresmann) {
  const int m = A->m(), p = A->p(), r = A->r();
  if (ehresmann.size() != static_cast<std::size_t>(r) * m)
    throw DimensionMismatch("Ehresmann components must be r x m");
  for (const auto& f : ehresmann)
    if (!(f.dims() == A->field_dims())) throw DimensionMismatch("Ehresmann field dimensions");
  const DependenceMask deps = union_dependence(ehresmann) | A->rho().dependence();
  FieldArray gamma(
      A->field_dims(), static_cast<std::size_t>(r) * p,
      [A, ehresmann, m, p, r](const Point& pt, int k) {
        const auto rho = A->rho().eval(pt, k);
        const auto e = eval_all(ehresmann, pt, k);
        std::vector<Jet> out(static_cast<std::size_t>(r) * p, Jet(A->field_dims().nvars(), k));
        for (int a = 0; a < r; ++a)
          for (int g = 0; g < p; ++g)
            for (int i = 0; i < m; ++i) out[a * p + g] += rho[A->rho_index(g, i)] * e[a * m + i];
        return out;
      },
      deps);
  return NonlinearConnection(A, std::move(gamma));
}

AdaptedDerivations adapted_derivations(const NonlinearConnection& C, const Point& pt, int order) {
  return AdaptedDerivations{derivations(C.algebroid(), pt, order), C.gamma().eval(pt, order)};
}

Jet delta_jet(const NonlinearConnection& C, const AdaptedDerivations& d, int alpha, const Jet& f) {
  const GeneralizedAlgebroid& A = C.algebroid();
  Jet out = anchor_derivation(A, d.base, alpha, f);
  for (int a = 0; a < A.r(); ++a)
    out -= d.gamma[C.gamma_index(a, alpha)] * fiber_partial(A, d.base, a, f);
  return out;
}

Jet vertical_jet(const NonlinearConnection& C, const AdaptedDerivations& d, int a, const Jet& f) {
  return fiber_partial(C.algebroid(), d.base, a, f);
}

ScalarField delta_action(const NonlinearConnection& C, int alpha, const ScalarField& f) {
  if (alpha < 0 || alpha >= C.p())
    throw IndexOutOfRange("delta_action index " + std::to_string(alpha + 1) + " outside 1.." +
                          std::to_string(C.p()));
  if (!(f.dims() == C.field_dims())) throw DimensionMismatch("function has wrong dimensions");
  const DependenceMask deps = f.dependence() | C.gamma().dependence() |
                              C.algebroid().rho().dependence();
  return ScalarField(C.field_dims(), deps, [C, alpha, f](const Point& pt, int k) {
    return delta_jet(C, adapted_derivations(C, pt, k), alpha, f.eval(pt, k + 1));
  });
}

std::vector<double> AdaptedFrameAt::pairing() const {
  const int n = size;
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      double v = 0.0;
      for (int u = 0; u < n; ++u) v += coframe[s * n + u] * frame[t * n + u];
      out[s * n + t] = v;
    }
  return out;
}

AdaptedFrameAt adapted_frame_at(const NonlinearConnection& C, const Point& pt) {
  const int p = C.p(), r = C.r(), n = p + r;
  const auto g = C.gamma().eval(pt, 0);
  AdaptedFrameAt f;
  f.size = n;
  f.frame.assign(static_cast<std::size_t>(n) * n, 0.0);
  f.coframe.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int s = 0; s < n; ++s) {
    f.frame[s * n + s] = 1.0;
    f.coframe[s * n + s] = 1.0;
  }
  for (int a = 0; a < r; ++a)
    for (int al = 0; al < p; ++al) {
      const double v = g[C.gamma_index(a, al)].value();
      f.frame[al * n + p + a] = -v;    // delta_alpha = d_alpha - Gamma^a_alpha d_a
      f.coframe[(p + a) * n + al] = v;  // delta y^a = Gamma^a_alpha dz^alpha + dy^a
    }
  return f;
}

double duality_residual(const NonlinearConnection& C, const Point& pt) {
  const auto f = adapted_frame_at(C, pt);
  return max_abs_identity_defect(f.pairing(), f.size);
}

namespace {

void check_vector(const NonlinearConnection& C, std::size_t nz, std::size_t ny) {
  if (nz != static_cast<std::size_t>(C.p()) || ny != static_cast<std::size_t>(C.r()))
    throw DimensionMismatch("component counts do not match (p, r)");
}

}  // namespace

VectorComponents to_adapted(const NonlinearConnection& C, const Point& pt, const VectorComponents& v) {
  check_vector(C, v.Z.size(), v.Y.size());
  const auto g = C.gamma().eval(pt, 0);
  VectorComponents out = v;
  for (int a = 0; a < C.r(); ++a)
    for (int al = 0; al < C.p(); ++al) out.Y[a] += g[C.gamma_index(a, al)].value() * v.Z[al];
  return out;
}

VectorComponents from_adapted(const NonlinearConnection& C, const Point& pt, const VectorComponents& v) {
  check_vector(C, v.Z.size(), v.Y.size());
  const auto g = C.gamma().eval(pt, 0);
  VectorComponents out = v;
  for (int a = 0; a < C.r(); ++a)
    for (int al = 0; al < C.p(); ++al) out.Y[a] -= g[C.gamma_index(a, al)].value() * v.Z[al];
  return out;
}

CovectorComponents to_adapted(const NonlinearConnection& C, const Point& pt, const CovectorComponents& w) {
  check_vector(C, w.A.size(), w.B.size());
  const auto g = C.gamma().eval(pt, 0);
  CovectorComponents out = w;
  for (int al = 0; al < C.p(); ++al)
    for (int a = 0; a < C.r(); ++a) out.A[al] -= w.B[a] * g[C.gamma_index(a, al)].value();
  return out;
}

CovectorComponents from_adapted(const NonlinearConnection& C, const Point& pt, const CovectorComponents& w) {
  check_vector(C, w.A.size(), w.B.size());
  const auto g = C.gamma().eval(pt, 0);
  CovectorComponents out = w;
  for (int al = 0; al < C.p(); ++al)
    for (int a = 0; a < C.r(); ++a) out.A[al] += w.B[a] * g[C.gamma_index(a, al)].value();
  return out;
}

FieldArray pointwise_inverse(const FieldArray& a, int n) {
  if (a.size() != static_cast<std::size_t>(n) * n) throw DimensionMismatch("matrix is not n x n");
  return FieldArray(
      a.dims(), a.size(),
      [a, n](const Point& pt, int k) {
        std::vector<Jet> inv;
        if (!try_invert(a.eval(pt, k), n, inv))
          throw SingularTransition("transition matrix is singular at " + to_string(pt));
        return inv;
      },
      a.dependence());
}

FrameChange FrameChange::inverse() const {
  FrameChange f = *this;
  std::swap(f.lambda, f.lambda_inv);
  std::swap(f.mmat, f.mmat_inv);
  std::swap(f.basemap, f.basemap_inverse);
  return f;
}

FrameChange make_frame_change(int m, int p, int r, std::vector<ScalarField> lambda,
                              std::vector<ScalarField> mmat, std::vector<ScalarField> basemap,
                              std::vector<ScalarField> basemap_inverse) {
  const Dims dims{m, r};
  if (lambda.size() != static_cast<std::size_t>(p) * p) throw DimensionMismatch("lambda must be p x p");
  if (mmat.size() != static_cast<std::size_t>(r) * r) throw DimensionMismatch("mmat must be r x r");
  if (basemap.size() != static_cast<std::size_t>(m) || basemap_inverse.size() != basemap.size())
    throw DimensionMismatch("basemap and its inverse must have m components");
  for (const auto* v : {&basemap, &basemap_inverse})
    for (const auto& f : *v) {
      if (!(f.dims() == dims)) throw DimensionMismatch("basemap field dimensions");
      if (!f.x_only()) throw DependenceViolation("basemap must depend on x only");
    }
  FrameChange F;
  F.m = m;
  F.p = p;
  F.r = r;
  F.lambda = FieldArray::from_fields(dims, std::move(lambda));
  F.mmat = FieldArray::from_fields(dims, std::move(mmat));
  require_x_only(F.lambda, dims, "lambda");
  require_x_only(F.mmat, dims, "mmat");
  F.lambda_inv = pointwise_inverse(F.lambda, p);
  F.mmat_inv = pointwise_inverse(F.mmat, r);
  F.basemap = std::move(basemap);
  F.basemap_inverse = std::move(basemap_inverse);
  return F;
}

FrameChange identity_frame_change(int m, int p, int r) {
  const Dims d{m, r};
  auto ident = [&](int n) {
    std::vector<ScalarField> v;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v.push_back(ScalarField::constant(d, i == j ? 1.0 : 0.0));
    return v;
  };
  std::vector<ScalarField> x;
  for (int i = 0; i < m; ++i) x.push_back(ScalarField::coordinate(d, i));
  return make_frame_change(m, p, r, ident(p), ident(r), x, x);
}

ValidationReport validate_frame_change(const FrameChange& F, std::span<const Point> pts,
                                       double tol, unsigned threads) {
  struct PerPoint {
    double lambda = 0.0, mmat = 0.0, basemap = 0.0;
  };
  auto per = parallel_map(pts.size(), threads, [&](std::size_t idx) {
    const Point& pt = pts[idx];
    auto defect = [&](const FieldArray& a, const FieldArray& b, int n) {
      const auto x = a.eval(pt, 0), y = b.eval(pt, 0);
      std::vector<double> xa, ya;
      for (const auto& j : x) xa.push_back(j.value());
      for (const auto& j : y) ya.push_back(j.value());
      return max_abs_identity_defect(matmul(xa, ya, n), n);
    };
    PerPoint out;
    out.lambda = defect(F.lambda, F.lambda_inv, F.p);
    out.mmat = defect(F.mmat, F.mmat_inv, F.r);
    Point image = pt;
    for (int i = 0; i < F.m; ++i) image.x[i] = F.basemap[i].value(pt);
    for (int i = 0; i < F.m; ++i)
      out.basemap = std::max(out.basemap, std::fabs(F.basemap_inverse[i].value(image) - pt.x[i]));
    return out;
  });
  std::vector<double> l, mm, b;
  for (const auto& v : per) {
    l.push_back(v.lambda);
    mm.push_back(v.mmat);
    b.push_back(v.basemap);
  }
  ValidationReport rep;
  rep.points = pts.size();
  rep.add(make_residual("frame_change.lambda_inverse", l, pts, tol));
  rep.add(make_residual("frame_change.mmat_inverse", mm, pts, tol));
  rep.add(make_residual("frame_change.basemap_roundtrip", b, pts, tol));
  return rep;
}

Point image_point(const FrameChange& F, const GeneralizedAlgebroid& A, const Point& pt) {
  Point out = pt;
  for (int i = 0; i < F.m; ++i) out.x[i] = F.basemap[i].value(pt);
  const auto ybar = fiber_coordinates(A, pt, 0);
  const auto M = F.mmat.eval(pt, 0);
  for (int a = 0; a < F.r; ++a) {
    double v = 0.0;
    for (int b = 0; b < F.r; ++b) v += M[a * F.r + b].value() * ybar[b].value();
    out.y[a] = v;
  }
  return out;
}

namespace {

void check_frame_change(const GeneralizedAlgebroid& A, const FrameChange& F) {
  if (F.m != A.m() || F.p != A.p() || F.r != A.r())
    throw DimensionMismatch("frame change dimensions do not match the geometry");
}

}  // namespace

GeneralizedAlgebroid transform_algebroid(const GeneralizedAlgebroid& A, const FrameChange& F) {
  check_frame_change(A, F);
  const int m = A.m(), p = A.p(), r = A.r();
  const int nv = A.field_dims().nvars();
  const FieldArray lam = F.lambda, lam_inv = F.lambda_inv;
  // rho'_{a'} = (Lambda^-1)^a_{a'} rho_a
  FieldArray rho(
      A.field_dims(), static_cast<std::size_t>(p) * m,
      [A, lam_inv, m, p, nv](const Point& pt, int k) {
        const auto rho = A.rho().eval(pt, k);
        const auto li = lam_inv.eval(pt, k);
        std::vector<Jet> out(static_cast<std::size_t>(p) * m, Jet(nv, k));
        for (int ap = 0; ap < p; ++ap)
          for (int a = 0; a < p; ++a)
            for (int i = 0; i < m; ++i) out[ap * m + i] += li[a * p + ap] * rho[A.rho_index(a, i)];
        return out;
      },
      A.rho().dependence() | lam_inv.dependence());
  // L'^{g'}_{a'b'} = Lambda^{g'}_g [ li^a_{a'} li^b_{b'} L^g_{ab} + rho'_{a'}(li^g_{b'}) - rho'_{b'}(li^g_{a'}) ]
  FieldArray L(
      A.field_dims(), static_cast<std::size_t>(p) * p * p,
      [A, lam, lam_inv, p, nv](const Point& pt, int k) {
        const auto d = derivations(A, pt, k);
        const auto Lj = A.L().eval(pt, k);
        const auto la = lam.eval(pt, k);
        const auto li1 = lam_inv.eval(pt, k + 1);
        const auto li = truncate_all(li1, k);
        // rli[(a'*p + g)*p + b'] = rho'_{a'}(li^g_{b'})
        std::vector<Jet> rli(static_cast<std::size_t>(p) * p * p, Jet(nv, k));
        for (int g = 0; g < p; ++g)
          for (int bp = 0; bp < p; ++bp) {
            std::vector<Jet> act;
            for (int a = 0; a < p; ++a) act.push_back(anchor_derivation(A, d, a, li1[g * p + bp]));
            for (int ap = 0; ap < p; ++ap) {
              Jet s(nv, k);
              for (int a = 0; a < p; ++a) s += li[a * p + ap] * act[a];
              rli[(ap * p + g) * p + bp] = s;
            }
          }
        std::vector<Jet> out(static_cast<std::size_t>(p) * p * p, Jet(nv, k));
        for (int ap = 0; ap < p; ++ap)
          for (int bp = ap + 1; bp < p; ++bp) {
            std::vector<Jet> inner(p, Jet(nv, k));
            for (int g = 0; g < p; ++g) {
              Jet s = rli[(ap * p + g) * p + bp] - rli[(bp * p + g) * p + ap];
              for (int a = 0; a < p; ++a)
                for (int b = 0; b < p; ++b)
                  s += li[a * p + ap] * li[b * p + bp] * Lj[A.L_index(g, a, b)];
              inner[g] = s;
            }
            for (int gp = 0; gp < p; ++gp) {
              Jet s(nv, k);
              for (int g = 0; g < p; ++g) s += la[gp * p + g] * inner[g];
              out[(gp * p + ap) * p + bp] = s;
              out[(gp * p + bp) * p + ap] = -s;
            }
          }
        return out;
      },
      A.L().dependence() | A.rho().dependence() | lam.dependence());
  GeneralizedAlgebroid out(m, p, r, std::move(rho), std::move(L));
  if (r == 0) return out;
  if (A.reference_chart()) return out.with_fiber_chart(F.mmat, F.mmat_inv);
  return out.with_fiber_chart(product_array(F.mmat, *A.fiber_chart(), r),
                              product_array(*A.fiber_chart_inverse(), F.mmat_inv, r));
}

NonlinearConnection transform_gamma(const NonlinearConnection& C, const FrameChange& F) {
  const GeneralizedAlgebroid& A = C.algebroid();
  check_frame_change(A, F);
  auto A2 = std::make_shared<const GeneralizedAlgebroid>(transform_algebroid(A, F));
  const int p = A.p(), r = A.r();
  const int nv = A.field_dims().nvars();
  const FieldArray mm = F.mmat, lam_inv = F.lambda_inv;
  // Gamma'^{a'}_{g'} = (M^{a'}_a Gamma^a_g - rho_g(M^{a'}_b) ybar^b) (Lambda^-1)^g_{g'}
  FieldArray gamma(
      A.field_dims(), static_cast<std::size_t>(r) * p,
      [C, mm, lam_inv, p, r, nv](const Point& pt, int k) {
        const GeneralizedAlgebroid& A = C.algebroid();
        const auto d = derivations(A, pt, k);
        const auto G = C.gamma().eval(pt, k);
        const auto M1 = mm.eval(pt, k + 1);
        const auto li = lam_inv.eval(pt, k);
        const auto ybar = fiber_coordinates(A, pt, k);
        std::vector<Jet> inner(static_cast<std::size_t>(r) * p, Jet(nv, k));
        for (int ap = 0; ap < r; ++ap)
          for (int g = 0; g < p; ++g) {
            Jet s(nv, k);
            for (int a = 0; a < r; ++a) s += M1[ap * r + a].truncated(k) * G[C.gamma_index(a, g)];
            for (int b = 0; b < r; ++b) s -= anchor_derivation(A, d, g, M1[ap * r + b]) * ybar[b];
            inner[ap * p + g] = s;
          }
        std::vector<Jet> out(static_cast<std::size_t>(r) * p, Jet(nv, k));
        for (int ap = 0; ap < r; ++ap)
          for (int gp = 0; gp < p; ++gp)
            for (int g = 0; g < p; ++g) out[ap * p + gp] += inner[ap * p + g] * li[g * p + gp];
        return out;
      },
      C.gamma().dependence() | mm.dependence() | lam_inv.dependence() | all_variables(A.field_dims()));
  return NonlinearConnection(A2, std::move(gamma));
}

}  // namespace algcalc
