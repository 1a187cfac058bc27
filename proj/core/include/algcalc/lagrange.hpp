#pragma once

#include <span>
#include <vector>

#include "algcalc/metric.hpp"

namespace algcalc {

enum class FundamentalKind { Lagrange, Finsler };

struct FundamentalFunction {
  FundamentalKind kind = FundamentalKind::Lagrange;
  ScalarField f;
};

// g_{ab} = 1/2 d^2 L / dy^a dy^b, or of F^2 for the Finsler kind; r*r, mirrored.
// Evaluable to jet order 1 (the fundamental function itself is taken to order 3).
FieldArray hessian_metric(const FundamentalFunction& F);

// rank of g at each point with relative pivot threshold 1e-10; residual is r - rank.
ValidationReport regularity_check(const FieldArray& g, int r, std::span<const Point> pts,
                                  unsigned threads = 1);

struct FinslerTolerances {
  double homogeneity = 1e-12;
  double euler = 1e-10;
};
// Homogeneity over the lambdas, the Euler residual y^a dF/dy^a - F, and positive definiteness
// of the Hessian of F^2 (failing points count 1).
ValidationReport finsler_checks(const ScalarField& F, std::span<const Point> pts,
                                std::span<const double> lambdas, FinslerTolerances tol = {},
                                unsigned threads = 1);
// max |y^a y^b g_ab - F^2| over points.
double euler_metric_residual(const ScalarField& F, std::span<const Point> pts);

// H^a_{bc} and V^a_{bc} of the Levi-Civita-type normal connection of g (r*r fields).
NormalDConnection levi_civita_normal(ConnectionPtr C, const FieldArray& g);

// T^a_{bc} and S^a_{bc}, each r^3, stored at (a*r + b)*r + c.
struct TorsionPair {
  std::vector<ScalarField> T, S;
};

// Adds the torsion terms; antisymmetry of T and S is checked wherever the result is evaluated.
NormalDConnection torsion_deform(const NormalDConnection& base, const FieldArray& g,
                                 const TorsionPair& TS);

// T = H_bc - H_cb + L (inverts torsion_deform) or with - L.
enum class TorsionConvention { plus_structure, minus_structure };
TorsionPair recover_torsions(const NormalDConnection& D,
                             TorsionConvention convention = TorsionConvention::plus_structure);
// Pointwise values of the recovered torsions, T then S.
std::vector<double> recovered_torsions_at(const NormalDConnection& D, const Point& pt,
                                          TorsionConvention convention = TorsionConvention::plus_structure);

// gH = gV = g; checks invertibility at the probes.
MetricStructure build_gl_space(const FieldArray& g, int r, std::span<const Point> probes = {});

}  // namespace algcalc
