#pragma once

#include <span>
#include <vector>

#include "algcalc/dtensor.hpp"

namespace algcalc {

// Symmetric blocks g_{alpha beta} (p x p) and g_{ab} (r x r). Only the upper triangle of the
// supplied matrices is used; evaluation mirrors it, so symmetry is exact.
class MetricStructure {
 public:
  MetricStructure(int p, int r, const std::vector<ScalarField>& gH,
                  const std::vector<ScalarField>& gV, bool h_riemannian = false,
                  bool v_riemannian = false);

  int p() const { return p_; }
  int r() const { return r_; }
  Dims field_dims() const { return gh_.dims(); }
  bool h_riemannian() const { return h_riemannian_; }
  bool v_riemannian() const { return v_riemannian_; }
  // Full mirrored p*p and r*r arrays.
  const FieldArray& h() const { return gh_; }
  const FieldArray& v() const { return gv_; }
  DTensorField h_tensor() const;
  DTensorField v_tensor() const;

 private:
  int p_, r_;
  FieldArray gh_, gv_;
  bool h_riemannian_, v_riemannian_;
};

// Mirrors the upper triangle of an n x n field matrix into one bulk array.
FieldArray symmetric_array(const std::vector<ScalarField>& full, int n);

// Pointwise metric blocks and inverses at one jet order; throws SingularMetric.
struct MetricJets {
  std::vector<Jet> h, v, h_inv, v_inv;
};
MetricJets metric_jets(const MetricStructure& G, const Point& pt, int order, int inverse_order);

struct InverseCache {
  std::vector<double> h_inv, v_inv;
  double residual = 0.0;  // max |g g~ - I| over both blocks
};
InverseCache inverse_at(const MetricStructure& G, const Point& pt);

// Invertibility, inverse residual, signature constancy and the Riemannian flags at samples.
ValidationReport validate_metric(const MetricStructure& G, std::span<const Point> pts, double tol,
                                 unsigned threads = 1);

// Four maxima of (g_{ab|c}) for D: g_{alpha beta|gamma}, g_{ab|gamma}, g_{alpha beta}|_c, g_{ab}|_c.
ValidationReport metrizability_residual(const DConnection& D, const MetricStructure& G,
                                        std::span<const Point> pts, double tol,
                                        unsigned threads = 1);
inline const char* const kMetrizabilityNames[4] = {
    "metrizability.h_block_h_deriv", "metrizability.v_block_h_deriv",
    "metrizability.h_block_v_deriv", "metrizability.v_block_v_deriv"};

DConnection canonical_dconnection(const MetricStructure& G, const DConnection& base);
// Base with Hv = dGamma/dy and every other block zero; defined for any p, r.
DConnection berwald_base(ConnectionPtr C);
DConnection berwald_canonical(const MetricStructure& G, ConnectionPtr C);

// O^{ae}_{bc} and O*^{ae}_{bc}, stored at ((a*n + e)*n + b)*n + c for each family.
struct ObataPair {
  int p = 0, r = 0;
  std::vector<double> h, h_star, v, v_star;
};
ObataPair obata_pair(const MetricStructure& G, const Point& pt);

// Shapes: xh X^eta_{eps beta} p*p*p, xv X^eta_{eps c} p*p*r, yh Y^d_{e gamma} r*r*p,
// yv Y^d_{ec} r*r*r; all stored [upper][lower][lower].
struct ObataTensors {
  std::vector<ScalarField> xh, xv, yh, yv;
};
// compatible: lower O index pairs with the deformation's middle index, which keeps (g_{ab|c}) = 0.
// swapped: the other pairing of the lower indices; not metric compatible in general.
enum class ObataConvention { compatible, swapped };
DConnection obata_deform(const MetricStructure& G, const ObataTensors& XY, ConnectionPtr C,
                         ObataConvention convention = ObataConvention::compatible);

DConnection base_deform(const MetricStructure& G, const DConnection& base);

}  // namespace algcalc
