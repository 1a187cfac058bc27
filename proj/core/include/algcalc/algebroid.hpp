#pragma once

#include <memory>
#include <span>
#include <vector>

#include "algcalc/field.hpp"
#include "algcalc/sampling.hpp"

namespace algcalc {

// Anchor rho^i_alpha(x) and structure functions L^g_{ab}(x) in local coordinates.
// Flat storage: rho at alpha*m + i, L at (g*p + a)*p + b.
class GeneralizedAlgebroid {
 public:
  GeneralizedAlgebroid(int m, int p, int r, FieldArray rho, FieldArray L);
  GeneralizedAlgebroid(int m, int p, int r, std::vector<ScalarField> rho,
                       std::vector<ScalarField> L);

  // rho = identity, L = 0 (the tangent algebroid, p = m).
  static GeneralizedAlgebroid standard(int m, int r);

  int m() const { return m_; }
  int p() const { return p_; }
  int r() const { return r_; }
  Dims field_dims() const { return {m_, r_}; }

  std::size_t rho_index(int alpha, int i) const { return static_cast<std::size_t>(alpha) * m_ + i; }
  std::size_t L_index(int g, int a, int b) const {
    return (static_cast<std::size_t>(g) * p_ + a) * p_ + b;
  }
  const FieldArray& rho() const { return rho_; }
  const FieldArray& L() const { return L_; }
  ScalarField rho(int alpha, int i) const { return rho_.component(rho_index(alpha, i)); }
  ScalarField L(int g, int a, int b) const { return L_.component(L_index(g, a, b)); }

  // Data produced by a frame change stays a function of the reference coordinates (x, y). The
  // fiber coordinates it is written in are ybar = N(x) y; without a chart, ybar = y.
  GeneralizedAlgebroid with_fiber_chart(FieldArray N, FieldArray N_inv) const;
  bool reference_chart() const { return !chart_; }
  const FieldArray* fiber_chart() const { return chart_ ? &chart_->N : nullptr; }
  const FieldArray* fiber_chart_inverse() const { return chart_ ? &chart_->N_inv : nullptr; }

 private:
  struct Chart {
    FieldArray N, N_inv;
  };
  int m_, p_, r_;
  FieldArray rho_;
  FieldArray L_;
  std::shared_ptr<const Chart> chart_;
};

// Per-point data for the derivations rho(e_alpha) and d/dybar^a at jet order k. In a fiber
// chart, the horizontal action picks up a vertical drift rho^k_alpha d_k(N^-1) N y.
struct Derivations {
  int order = 0;
  std::vector<Jet> rho;    // p*m
  std::vector<Jet> n_inv;  // r*r, empty in the reference chart
  std::vector<Jet> drift;  // p*r, empty in the reference chart
};
Derivations derivations(const GeneralizedAlgebroid& A, const Point& pt, int order);
// Both take f at order k + 1 and return order k.
Jet anchor_derivation(const GeneralizedAlgebroid& A, const Derivations& d, int alpha, const Jet& f);
Jet fiber_partial(const GeneralizedAlgebroid& A, const Derivations& d, int a, const Jet& f);
// ybar as jets.
std::vector<Jet> fiber_coordinates(const GeneralizedAlgebroid& A, const Point& pt, int order);

using AlgebroidPtr = std::shared_ptr<const GeneralizedAlgebroid>;

// Section Z^alpha d_alpha + Y^a d_a (natural basis).
struct Section {
  std::vector<ScalarField> Z;
  std::vector<ScalarField> Y;
};

Section basis_section(const GeneralizedAlgebroid& A, int index);  // index < p: H, else V

// theta[alpha][i] = theta^i_alpha, theta_inv[j][g] = inverse-theta^g_j, both x-only.
struct FrameDiffeoData {
  int m = 0;
  int r = 0;
  std::vector<ScalarField> theta;
  std::vector<ScalarField> theta_inv;
};

// Pointwise check theta * theta_inv = I; throws SingularFrame above `tol`.
void check_frame(const FrameDiffeoData& F, std::span<const Point> probes, double tol = 1e-10);
// Structure functions of the frame: antisymmetrized commutator coefficients, as one bulk array.
FieldArray from_frame(const FrameDiffeoData& F, std::span<const Point> probes = {});
// The algebroid with anchor theta and structure functions from_frame(F).
GeneralizedAlgebroid algebroid_from_frame(const FrameDiffeoData& F, std::span<const Point> probes = {});

ValidationReport validate_structure(const GeneralizedAlgebroid& A, std::span<const Point> pts,
                                    double tol, unsigned threads = 1);

// Z^alpha rho^i_alpha df/dx^i + Y^a df/dy^a.
ScalarField anchor_action(const GeneralizedAlgebroid& A, const Section& X, const ScalarField& f);
Section bracket(const GeneralizedAlgebroid& A, const Section& X1, const Section& X2);

// Max-norm of the cyclic Jacobi sum for one triple of constant basis sections.
double jacobi_residual(const GeneralizedAlgebroid& A, std::span<const Point> pts, int i, int j,
                       int k, unsigned threads = 1);
// Max over all basis triples (repeated indices vanish by antisymmetry and are skipped).
double jacobi_residual(const GeneralizedAlgebroid& A, std::span<const Point> pts,
                       unsigned threads = 1);

}  // namespace algcalc
