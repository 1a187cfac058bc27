#pragma once

#include <memory>
#include <span>
#include <vector>

#include "algcalc/algebroid.hpp"

namespace algcalc {

// Coefficients Gamma^a_alpha(x, y), stored at a*p + alpha.
class NonlinearConnection {
 public:
  NonlinearConnection(AlgebroidPtr A, FieldArray gamma);
  NonlinearConnection(AlgebroidPtr A, std::vector<ScalarField> gamma);
  static NonlinearConnection zero(AlgebroidPtr A);

  const GeneralizedAlgebroid& algebroid() const { return *A_; }
  const AlgebroidPtr& algebroid_ptr() const { return A_; }
  int m() const { return A_->m(); }
  int p() const { return A_->p(); }
  int r() const { return A_->r(); }
  Dims field_dims() const { return A_->field_dims(); }

  std::size_t gamma_index(int a, int alpha) const {
    return static_cast<std::size_t>(a) * A_->p() + alpha;
  }
  const FieldArray& gamma() const { return gamma_; }
  ScalarField gamma(int a, int alpha) const { return gamma_.component(gamma_index(a, alpha)); }

 private:
  AlgebroidPtr A_;
  FieldArray gamma_;
};

using ConnectionPtr = std::shared_ptr<const NonlinearConnection>;

// Gamma^a_g = rho^k_g Gamma^a_k from Ehresmann components stored at a*m + k.
NonlinearConnection from_ehresmann(AlgebroidPtr A, const std::vector<ScalarField>& ehresmann);

// Per-point bundle used by every adapted-frame derivation: delta_alpha and d/dy^a.
struct AdaptedDerivations {
  Derivations base;
  std::vector<Jet> gamma;  // r*p, order k
};
AdaptedDerivations adapted_derivations(const NonlinearConnection& C, const Point& pt, int order);
// delta_alpha f = rho_alpha(f) - Gamma^a_alpha df/dy^a; f at order k + 1, result order k.
Jet delta_jet(const NonlinearConnection& C, const AdaptedDerivations& d, int alpha, const Jet& f);
Jet vertical_jet(const NonlinearConnection& C, const AdaptedDerivations& d, int a, const Jet& f);

ScalarField delta_action(const NonlinearConnection& C, int alpha, const ScalarField& f);

// Adapted frame (delta_alpha, d_a) and coframe (dz^alpha, delta y^a) written in the natural
// basis at one point. Row s of `frame` is the s-th frame vector; row s of `coframe` is the
// s-th coframe covector. Both are (p + r) x (p + r).
struct AdaptedFrameAt {
  int size = 0;
  std::vector<double> frame;
  std::vector<double> coframe;
  std::vector<double> pairing() const;  // <coframe_s, frame_t>
};
AdaptedFrameAt adapted_frame_at(const NonlinearConnection& C, const Point& pt);
double duality_residual(const NonlinearConnection& C, const Point& pt);

struct VectorComponents {
  std::vector<double> Z, Y;
};
struct CovectorComponents {
  std::vector<double> A, B;  // along dz^alpha and dy^a (natural) or delta y^a (adapted)
};
VectorComponents to_adapted(const NonlinearConnection& C, const Point& pt, const VectorComponents& v);
VectorComponents from_adapted(const NonlinearConnection& C, const Point& pt, const VectorComponents& v);
CovectorComponents to_adapted(const NonlinearConnection& C, const Point& pt, const CovectorComponents& w);
CovectorComponents from_adapted(const NonlinearConnection& C, const Point& pt, const CovectorComponents& w);

// Change of frame: Lambda^{a'}_a (p x p, stored [a'][a]), M^{a'}_a (r x r), and the base map with
// its supplied inverse. All matrices are x-only; inverses are computed pointwise on jets.
struct FrameChange {
  int m = 0, p = 0, r = 0;
  FieldArray lambda, lambda_inv;
  FieldArray mmat, mmat_inv;
  std::vector<ScalarField> basemap;          // x'(x)
  std::vector<ScalarField> basemap_inverse;  // x(x'), evaluated at primed coordinates

  FrameChange inverse() const;
};

FrameChange make_frame_change(int m, int p, int r, std::vector<ScalarField> lambda,
                              std::vector<ScalarField> mmat, std::vector<ScalarField> basemap,
                              std::vector<ScalarField> basemap_inverse);
FrameChange identity_frame_change(int m, int p, int r);
// Pointwise inverse of a square matrix of x-only fields; throws SingularTransition.
FieldArray pointwise_inverse(const FieldArray& a, int n);

// Checks the Lambda and M inverses and basemap o inverse = id at the points.
ValidationReport validate_frame_change(const FrameChange& F, std::span<const Point> pts,
                                       double tol = 1e-10, unsigned threads = 1);
// (x', y') for a reference point: x' = basemap(x), y' = M ybar.
Point image_point(const FrameChange& F, const GeneralizedAlgebroid& A, const Point& pt);

GeneralizedAlgebroid transform_algebroid(const GeneralizedAlgebroid& A, const FrameChange& F);
NonlinearConnection transform_gamma(const NonlinearConnection& C, const FrameChange& F);

}  // namespace algcalc
