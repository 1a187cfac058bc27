#include "algcalc/dtensor.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>

#include "algcalc/error.hpp"

namespace algcalc {

namespace {

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

struct Strides {
  std::vector<int> extent;
  std::vector<std::size_t> stride;
  std::size_t count = 1;
};

Strides strides_of(const IndexSignature& sig, int p, int r) {
  Strides s;
  const std::size_t n = sig.rank();
  s.extent.resize(n);
  s.stride.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.extent[i] = sig.extent(i, p, r);
  for (std::size_t i = n; i-- > 0;) {
    s.stride[i] = s.count;
    s.count *= static_cast<std::size_t>(s.extent[i]);
  }
  return s;
}

void decode(const Strides& s, std::size_t flat, std::vector<int>& idx) {
  idx.resize(s.extent.size());
  for (std::size_t i = 0; i < s.extent.size(); ++i) {
    idx[i] = static_cast<int>(flat / s.stride[i]);
    flat %= s.stride[i];
  }
}

void check_compatible(const DConnection& D, const DTensorField& T) {
  if (D.p() != T.p() || D.r() != T.r() || !(D.field_dims() == T.field_dims()))
    throw DimensionMismatch("d-tensor and d-connection dimensions differ");
}

// Monotone map of doubles to integers that also orders NaNs, so sorting is well defined.
std::int64_t total_order_key(double v) {
  const auto bits = std::bit_cast<std::int64_t>(v);
  return bits < 0 ? bits ^ std::numeric_limits<std::int64_t>::max() : bits;
}

// Correction terms shared by both derivatives: `block(upper, lower)` gives the connection
// coefficient with the derivative index already fixed. The per-slot terms are added in a
// canonical order, so relabeling the slots of T reproduces the result bit for bit.
template <class HBlock, class VBlock>
Jet corrections(const Strides& st, const IndexSignature& sig, const std::vector<int>& idx,
                std::size_t flat, const std::vector<Jet>& T, int p, int r, HBlock hblock,
                VBlock vblock, Jet val) {
  std::vector<Jet> terms;
  terms.reserve(sig.rank() + 1);
  terms.push_back(std::move(val));
  for (std::size_t s = 0; s < sig.rank(); ++s) {
    const int e = idx[s];
    const std::size_t base = flat - static_cast<std::size_t>(e) * st.stride[s];
    const bool horizontal = sig[s].family == Family::H;
    const bool contra = sig[s].variance == Variance::Contra;
    const int n = horizontal ? p : r;
    Jet c(terms.front().nvars(), terms.front().order());
    for (int q = 0; q < n; ++q) {
      const Jet& t = T[base + static_cast<std::size_t>(q) * st.stride[s]];
      const Jet& b = contra ? (horizontal ? hblock(e, q) : vblock(e, q)) : (horizontal ? hblock(q, e) : vblock(q, e));
      c += b * t;
    }
    terms.push_back(contra ? std::move(c) : -c);
  }
  std::sort(terms.begin(), terms.end(), [](const Jet& a, const Jet& b) {
    return std::lexicographical_compare(a.raw().begin(), a.raw().end(), b.raw().begin(), b.raw().end(),
                                        [](double u, double v) { return total_order_key(u) < total_order_key(v); });
  });
  Jet sum = terms.front();
  for (std::size_t i = 1; i < terms.size(); ++i) sum += terms[i];
  return sum;
}

}  // namespace

IndexSignature::IndexSignature(std::vector<Slot> slots) : slots_(std::move(slots)) {
  if (slots_.size() > kMaxSlots)
    throw DimensionMismatch("index signature exceeds " + std::to_string(kMaxSlots) + " slots");
}

std::size_t IndexSignature::component_count(int p, int r) const {
  std::size_t n = 1;
  for (std::size_t i = 0; i < slots_.size(); ++i) n *= static_cast<std::size_t>(extent(i, p, r));
  return n;
}

IndexSignature IndexSignature::appended(Slot s) const {
  auto v = slots_;
  v.push_back(s);
  return IndexSignature(std::move(v));
}

DTensorField::DTensorField(int p, int r, IndexSignature sig, FieldArray components)
    : p_(p), r_(r), sig_(std::move(sig)), comps_(std::move(components)) {
  if (comps_.size() != sig_.component_count(p, r))
    throw DimensionMismatch("d-tensor component count does not match its signature");
}

DTensorField DTensorField::from_fields(int p, int r, IndexSignature sig, std::vector<ScalarField> f) {
  if (f.empty()) throw DimensionMismatch("d-tensor needs at least one component");
  const Dims d = f.front().dims();
  return DTensorField(p, r, std::move(sig), FieldArray::from_fields(d, std::move(f)));
}

std::size_t DTensorField::offset(std::span<const int> index) const {
  if (index.size() != sig_.rank()) throw DimensionMismatch("index length does not match rank");
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    const int e = sig_.extent(i, p_, r_);
    if (index[i] < 0 || index[i] >= e) throw IndexOutOfRange("d-tensor index out of range");
    off = off * e + index[i];
  }
  return off;
}

DConnection::DConnection(ConnectionPtr C, FieldArray blocks) : C_(std::move(C)), blocks_(std::move(blocks)) {
  if (!C_) throw DimensionMismatch("d-connection needs a nonlinear connection");
  if (blocks_.size() != layout().size()) throw DimensionMismatch("d-connection block sizes");
  if (!(blocks_.dims() == C_->field_dims())) throw DimensionMismatch("d-connection field dimensions");
}

DConnection DConnection::from_blocks(ConnectionPtr C, std::vector<ScalarField> hh,
                                     std::vector<ScalarField> hv, std::vector<ScalarField> vh,
                                     std::vector<ScalarField> vv) {
  const std::size_t p = C->p(), r = C->r();
  if (hh.size() != p * p * p || hv.size() != r * r * p || vh.size() != p * p * r ||
      vv.size() != r * r * r)
    throw DimensionMismatch("d-connection block shapes must be p^3, r^2 p, p^2 r, r^3");
  std::vector<ScalarField> all;
  for (auto* v : {&hh, &hv, &vh, &vv}) all.insert(all.end(), v->begin(), v->end());
  const Dims d = C->field_dims();
  return DConnection(std::move(C), FieldArray::from_fields(d, std::move(all)));
}

DConnection DConnection::zero(ConnectionPtr C) {
  const DConnectionLayout L{C->p(), C->r()};
  const Dims d = C->field_dims();
  const int nv = d.nvars();
  const std::size_t n = L.size();
  return DConnection(std::move(C), FieldArray(
                                       d, n,
                                       [n, nv](const Point&, int k) {
                                         return std::vector<Jet>(n, Jet(nv, k));
                                       },
                                       0));
}

NormalDConnection::NormalDConnection(ConnectionPtr C, FieldArray blocks)
    : C_(std::move(C)), blocks_(std::move(blocks)) {
  if (!C_) throw DimensionMismatch("normal d-connection needs a nonlinear connection");
  if (C_->p() != C_->r()) throw DimensionMismatch("normal d-connection requires p = r");
  const std::size_t r = C_->r();
  if (blocks_.size() != 2 * r * r * r) throw DimensionMismatch("normal d-connection block sizes");
}

DConnection NormalDConnection::to_dconnection() const {
  const int r = this->r();
  const DConnectionLayout L{r, r};
  const NormalDConnection self = *this;
  FieldArray blocks(
      C_->field_dims(), L.size(),
      [self, L, r](const Point& pt, int k) {
        const auto b = self.eval(pt, k);
        std::vector<Jet> out(L.size());
        for (int a = 0; a < r; ++a)
          for (int c = 0; c < r; ++c)
            for (int g = 0; g < r; ++g) {
              out[L.hh(a, c, g)] = b[self.h(a, c, g)];
              out[L.hv(a, c, g)] = b[self.h(a, c, g)];
              out[L.vh(a, c, g)] = b[self.v(a, c, g)];
              out[L.vv(a, c, g)] = b[self.v(a, c, g)];
            }
        return out;
      },
      blocks_.dependence());
  return DConnection(C_, std::move(blocks));
}

DConnection berwald(ConnectionPtr C) {
  const int p = C->p(), r = C->r();
  if (p != r)
    throw DimensionMismatch("the Berwald connection assigns dGamma/dy to both H blocks and needs p = r");
  const DConnectionLayout L{p, r};
  const int nv = C->field_dims().nvars();
  FieldArray blocks(
      C->field_dims(), L.size(),
      [C, L, r, nv](const Point& pt, int k) {
        const auto ad = adapted_derivations(*C, pt, k);
        const auto G = C->gamma().eval(pt, k + 1);
        std::vector<Jet> out(L.size(), Jet(nv, k));
        for (int a = 0; a < r; ++a)
          for (int g = 0; g < r; ++g)
            for (int b = 0; b < r; ++b) {
              Jet v = vertical_jet(*C, ad, b, G[C->gamma_index(a, g)]);
              out[L.hh(a, b, g)] = v;
              out[L.hv(a, b, g)] = std::move(v);
            }
        return out;
      },
      C->gamma().dependence());
  return DConnection(C, std::move(blocks));
}

std::vector<Jet> h_cov_kernel(const DConnection& D, const std::vector<Jet>& blocks,
                              const AdaptedDerivations& ad, const IndexSignature& sig,
                              const std::vector<Jet>& T) {
  const int p = D.p(), r = D.r();
  const DConnectionLayout L = D.layout();
  const Strides st = strides_of(sig, p, r);
  const int k = ad.base.order;
  const auto Tk = truncate_all(T, k);
  std::vector<Jet> out(st.count * p);
  std::vector<int> idx;
  for (std::size_t I = 0; I < st.count; ++I) {
    decode(st, I, idx);
    for (int g = 0; g < p; ++g) {
      auto hb = [&](int up, int lo) -> const Jet& { return blocks[L.hh(up, lo, g)]; };
      auto vb = [&](int up, int lo) -> const Jet& { return blocks[L.hv(up, lo, g)]; };
      out[I * p + g] = corrections(st, sig, idx, I, Tk, p, r, hb, vb, delta_jet(D.nlconn(), ad, g, T[I]));
    }
  }
  return out;
}

std::vector<Jet> v_cov_kernel(const DConnection& D, const std::vector<Jet>& blocks,
                              const AdaptedDerivations& ad, const IndexSignature& sig,
                              const std::vector<Jet>& T) {
  const int p = D.p(), r = D.r();
  const DConnectionLayout L = D.layout();
  const Strides st = strides_of(sig, p, r);
  const int k = ad.base.order;
  const auto Tk = truncate_all(T, k);
  std::vector<Jet> out(st.count * r);
  std::vector<int> idx;
  for (std::size_t I = 0; I < st.count; ++I) {
    decode(st, I, idx);
    for (int c = 0; c < r; ++c) {
      auto hb = [&](int up, int lo) -> const Jet& { return blocks[L.vh(up, lo, c)]; };
      auto vb = [&](int up, int lo) -> const Jet& { return blocks[L.vv(up, lo, c)]; };
      out[I * r + c] = corrections(st, sig, idx, I, Tk, p, r, hb, vb, vertical_jet(D.nlconn(), ad, c, T[I]));
    }
  }
  return out;
}

namespace {

DependenceMask cov_deps(const DConnection& D, const DTensorField& T) {
  return D.blocks().dependence() | T.components().dependence() | D.nlconn().gamma().dependence() |
         D.algebroid().rho().dependence();
}

}  // namespace

DTensorField h_cov_deriv(const DConnection& D, const DTensorField& T) {
  check_compatible(D, T);
  const IndexSignature sig = T.signature().appended({Family::H, Variance::Co});
  const IndexSignature in = T.signature();
  FieldArray comps(
      T.field_dims(), sig.component_count(D.p(), D.r()),
      [D, T, in](const Point& pt, int k) {
        return h_cov_kernel(D, D.eval(pt, k), adapted_derivations(D.nlconn(), pt, k), in, T.eval(pt, k + 1));
      },
      cov_deps(D, T));
  return DTensorField(D.p(), D.r(), sig, std::move(comps));
}

DTensorField v_cov_deriv(const DConnection& D, const DTensorField& T) {
  check_compatible(D, T);
  const IndexSignature sig = T.signature().appended({Family::V, Variance::Co});
  const IndexSignature in = T.signature();
  FieldArray comps(
      T.field_dims(), sig.component_count(D.p(), D.r()),
      [D, T, in](const Point& pt, int k) {
        return v_cov_kernel(D, D.eval(pt, k), adapted_derivations(D.nlconn(), pt, k), in, T.eval(pt, k + 1));
      },
      cov_deps(D, T));
  return DTensorField(D.p(), D.r(), sig, std::move(comps));
}

namespace {

DTensorField slice_last(const DTensorField& full, const IndexSignature& sig, int n, int which) {
  const FieldArray f = full.components();
  const std::size_t count = f.size() / n;
  FieldArray comps(
      f.dims(), count,
      [f, count, n, which](const Point& pt, int k) {
        const auto all = f.eval(pt, k);
        std::vector<Jet> out;
        out.reserve(count);
        for (std::size_t I = 0; I < count; ++I) out.push_back(all[I * n + which]);
        return out;
      },
      f.dependence());
  return DTensorField(full.p(), full.r(), sig, std::move(comps));
}

}  // namespace

DTensorField h_cov_deriv(const DConnection& D, const DTensorField& T, int gamma) {
  if (gamma < 0 || gamma >= D.p()) throw IndexOutOfRange("horizontal derivative index");
  return slice_last(h_cov_deriv(D, T), T.signature(), D.p(), gamma);
}

DTensorField v_cov_deriv(const DConnection& D, const DTensorField& T, int c) {
  if (c < 0 || c >= D.r()) throw IndexOutOfRange("vertical derivative index");
  return slice_last(v_cov_deriv(D, T), T.signature(), D.r(), c);
}

DTensorField cov_deriv_along(const DConnection& D, const Section& X, const DTensorField& T) {
  check_compatible(D, T);
  const int p = D.p(), r = D.r();
  if (static_cast<int>(X.Z.size()) != p || static_cast<int>(X.Y.size()) != r)
    throw DimensionMismatch("section component counts do not match (p, r)");
  const IndexSignature in = T.signature();
  const std::size_t count = in.component_count(p, r);
  const int nv = T.field_dims().nvars();
  FieldArray comps(
      T.field_dims(), count,
      [D, T, X, in, count, p, r, nv](const Point& pt, int k) {
        const auto blocks = D.eval(pt, k);
        const auto ad = adapted_derivations(D.nlconn(), pt, k);
        const auto Tj = T.eval(pt, k + 1);
        const auto h = h_cov_kernel(D, blocks, ad, in, Tj);
        const auto v = v_cov_kernel(D, blocks, ad, in, Tj);
        const auto Z = eval_all(X.Z, pt, k), Y = eval_all(X.Y, pt, k);
        std::vector<Jet> out(count, Jet(nv, k));
        for (std::size_t I = 0; I < count; ++I) {
          for (int g = 0; g < p; ++g) out[I] += Z[g] * h[I * p + g];
          for (int c = 0; c < r; ++c) out[I] += Y[c] * v[I * r + c];
        }
        return out;
      },
      cov_deps(D, T) | union_dependence(X.Z) | union_dependence(X.Y));
  return DTensorField(p, r, in, std::move(comps));
}

DConnection transform_dconnection(const DConnection& D, const FrameChange& F) {
  auto C2 = std::make_shared<const NonlinearConnection>(transform_gamma(D.nlconn(), F));
  const int p = D.p(), r = D.r();
  const DConnectionLayout L = D.layout();
  const int nv = D.field_dims().nvars();
  const FieldArray lam = F.lambda, lam_inv = F.lambda_inv, mm = F.mmat, mm_inv = F.mmat_inv;
  FieldArray blocks(
      D.field_dims(), L.size(),
      [D, lam, lam_inv, mm, mm_inv, L, p, r, nv](const Point& pt, int k) {
        const GeneralizedAlgebroid& A = D.algebroid();
        const auto d = derivations(A, pt, k);
        const auto B = D.eval(pt, k);
        const auto la = lam.eval(pt, k);
        const auto li1 = lam_inv.eval(pt, k + 1);
        const auto li = truncate_all(li1, k);
        const auto M = mm.eval(pt, k);
        const auto mi1 = mm_inv.eval(pt, k + 1);
        const auto mi = truncate_all(mi1, k);
        std::vector<Jet> out(L.size(), Jet(nv, k));
        const Jet zero(nv, k);
        // Horizontal blocks: X'[u'][b'][g'] = T[u'][u] (rho_g(S^u_{b'}) + B[u][b][g] S^b_{b'}) li^g_{g'}
        auto horizontal = [&](int nu, const std::vector<Jet>& T, const std::vector<Jet>& S1,
                              const std::vector<Jet>& S, auto block, auto dest) {
          std::vector<Jet> inner(static_cast<std::size_t>(nu) * nu * p, zero);
          for (int u = 0; u < nu; ++u)
            for (int bp = 0; bp < nu; ++bp)
              for (int g = 0; g < p; ++g) {
                Jet s = anchor_derivation(A, d, g, S1[u * nu + bp]);
                for (int b = 0; b < nu; ++b) s += block(u, b, g) * S[b * nu + bp];
                inner[(u * nu + bp) * p + g] = std::move(s);
              }
          for (int up = 0; up < nu; ++up)
            for (int bp = 0; bp < nu; ++bp)
              for (int gp = 0; gp < p; ++gp) {
                Jet s = zero;
                for (int u = 0; u < nu; ++u) {
                  Jet t = zero;
                  for (int g = 0; g < p; ++g) t += inner[(u * nu + bp) * p + g] * li[g * p + gp];
                  s += T[up * nu + u] * t;
                }
                out[dest(up, bp, gp)] = std::move(s);
              }
        };
        horizontal(p, la, li1, li, [&](int u, int b, int g) -> const Jet& { return B[L.hh(u, b, g)]; },
                   [&](int u, int b, int g) { return L.hh(u, b, g); });
        horizontal(r, M, mi1, mi, [&](int u, int b, int g) -> const Jet& { return B[L.hv(u, b, g)]; },
                   [&](int u, int b, int g) { return L.hv(u, b, g); });
        // Vertical blocks: X'[u'][b'][c'] = T[u'][u] B[u][b][c] S^b_{b'} mi^c_{c'}
        auto vertical = [&](int nu, const std::vector<Jet>& T, const std::vector<Jet>& S, auto block,
                            auto dest) {
          for (int up = 0; up < nu; ++up)
            for (int bp = 0; bp < nu; ++bp)
              for (int cp = 0; cp < r; ++cp) {
                Jet s = zero;
                for (int u = 0; u < nu; ++u)
                  for (int b = 0; b < nu; ++b)
                    for (int c = 0; c < r; ++c)
                      s += T[up * nu + u] * block(u, b, c) * S[b * nu + bp] * mi[c * r + cp];
                out[dest(up, bp, cp)] = std::move(s);
              }
        };
        vertical(p, la, li, [&](int u, int b, int c) -> const Jet& { return B[L.vh(u, b, c)]; },
                 [&](int u, int b, int c) { return L.vh(u, b, c); });
        vertical(r, M, mi, [&](int u, int b, int c) -> const Jet& { return B[L.vv(u, b, c)]; },
                 [&](int u, int b, int c) { return L.vv(u, b, c); });
        return out;
      },
      D.blocks().dependence() | lam.dependence() | mm.dependence() | D.algebroid().rho().dependence());
  return DConnection(C2, std::move(blocks));
}

DTensorField tensor_product(const DTensorField& S, const DTensorField& T) {
  if (S.p() != T.p() || S.r() != T.r() || !(S.field_dims() == T.field_dims()))
    throw DimensionMismatch("tensor product of d-tensors with different dimensions");
  std::vector<Slot> slots = S.signature().slots();
  slots.insert(slots.end(), T.signature().slots().begin(), T.signature().slots().end());
  IndexSignature sig(std::move(slots));
  const std::size_t ns = S.components().size(), nt = T.components().size();
  FieldArray comps(
      S.field_dims(), ns * nt,
      [S, T, ns, nt](const Point& pt, int k) {
        const auto a = S.eval(pt, k), b = T.eval(pt, k);
        std::vector<Jet> out;
        out.reserve(ns * nt);
        for (std::size_t i = 0; i < ns; ++i)
          for (std::size_t j = 0; j < nt; ++j) out.push_back(a[i] * b[j]);
        return out;
      },
      S.components().dependence() | T.components().dependence());
  return DTensorField(S.p(), S.r(), std::move(sig), std::move(comps));
}

DTensorField permute_slots(const DTensorField& T, const std::vector<int>& perm) {
  const std::size_t n = T.signature().rank();
  if (perm.size() != n) throw DimensionMismatch("permutation length does not match rank");
  std::vector<bool> seen(n, false);
  for (int q : perm) {
    if (q < 0 || static_cast<std::size_t>(q) >= n || seen[q]) throw IndexOutOfRange("not a permutation");
    seen[q] = true;
  }
  std::vector<Slot> slots;
  for (int q : perm) slots.push_back(T.signature()[q]);
  IndexSignature sig(std::move(slots));
  const Strides in = strides_of(T.signature(), T.p(), T.r());
  const Strides out = strides_of(sig, T.p(), T.r());
  // src[J] = flat index into T for output component J
  std::vector<std::size_t> src(out.count);
  std::vector<int> idx;
  for (std::size_t J = 0; J < out.count; ++J) {
    decode(out, J, idx);
    std::size_t off = 0;
    for (std::size_t i = 0; i < n; ++i) off += static_cast<std::size_t>(idx[i]) * in.stride[perm[i]];
    src[J] = off;
  }
  const FieldArray f = T.components();
  FieldArray comps(
      T.field_dims(), out.count,
      [f, src](const Point& pt, int k) {
        const auto a = f.eval(pt, k);
        std::vector<Jet> o;
        o.reserve(src.size());
        for (std::size_t s : src) o.push_back(a[s]);
        return o;
      },
      f.dependence());
  return DTensorField(T.p(), T.r(), std::move(sig), std::move(comps));
}

DTensorField contract(const DTensorField& T, int slot_a, int slot_b) {
  const IndexSignature& sig = T.signature();
  const int n = static_cast<int>(sig.rank());
  if (slot_a < 0 || slot_b < 0 || slot_a >= n || slot_b >= n || slot_a == slot_b)
    throw IndexOutOfRange("contraction slots");
  const Slot sa = sig[slot_a], sb = sig[slot_b];
  if (sa.family != sb.family || sa.variance == sb.variance)
    throw DimensionMismatch("contraction needs one contra and one co slot of the same family");
  std::vector<Slot> rest;
  for (int i = 0; i < n; ++i)
    if (i != slot_a && i != slot_b) rest.push_back(sig[i]);
  IndexSignature out_sig(std::move(rest));
  const Strides in = strides_of(sig, T.p(), T.r());
  const Strides out = strides_of(out_sig, T.p(), T.r());
  const int ext = sig.extent(slot_a, T.p(), T.r());
  std::vector<std::vector<std::size_t>> src(out.count);
  std::vector<int> idx;
  for (std::size_t J = 0; J < out.count; ++J) {
    decode(out, J, idx);
    std::size_t base = 0;
    for (int i = 0, o = 0; i < n; ++i) {
      if (i == slot_a || i == slot_b) continue;
      base += static_cast<std::size_t>(idx[o++]) * in.stride[i];
    }
    for (int e = 0; e < ext; ++e) src[J].push_back(base + e * (in.stride[slot_a] + in.stride[slot_b]));
  }
  const FieldArray f = T.components();
  const int nv = T.field_dims().nvars();
  FieldArray comps(
      T.field_dims(), out.count,
      [f, src, nv](const Point& pt, int k) {
        const auto a = f.eval(pt, k);
        std::vector<Jet> o(src.size(), Jet(nv, k));
        for (std::size_t J = 0; J < src.size(); ++J)
          for (std::size_t s : src[J]) o[J] += a[s];
        return o;
      },
      f.dependence());
  return DTensorField(T.p(), T.r(), std::move(out_sig), std::move(comps));
}

}  // namespace algcalc
