#pragma once

#include <cmath>
#include <limits>
#include <type_traits>
#include <utility>
#include <vector>

#include "algcalc/jet.hpp"

namespace algcalc {

inline constexpr double kInverseRelTol = 1e-12;
inline constexpr double kPivotRelTol = 1e-10;

inline double value_of(double v) { return v; }
inline double value_of(const Jet& j) { return j.value(); }
inline double like(double, double v) { return v; }
inline Jet like(const Jet& j, double v) { return Jet(j.nvars(), j.order(), v); }

// Gauss-Jordan inversion of a row-major n x n matrix with partial pivoting on values. Works over
// doubles and jets alike. Fails when a pivot drops below rel_tol times the largest entry.
template <class T>
bool try_invert(std::vector<T> a, int n, std::vector<T>& inv, double rel_tol = kInverseRelTol) {
  if (n == 0) {
    inv.clear();
    return true;
  }
  double scale = 0.0;
  for (const auto& v : a) scale = std::max(scale, std::fabs(value_of(v)));
  if (!(scale > 0.0) || !std::isfinite(scale)) return false;
  inv.assign(a.size(), like(a[0], 0.0));
  for (int i = 0; i < n; ++i) inv[i * n + i] = like(a[0], 1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::fabs(value_of(a[r * n + c])) > std::fabs(value_of(a[piv * n + c]))) piv = r;
    if (!(std::fabs(value_of(a[piv * n + c])) > rel_tol * scale)) return false;
    if (piv != c)
      for (int k = 0; k < n; ++k) {
        std::swap(a[piv * n + k], a[c * n + k]);
        std::swap(inv[piv * n + k], inv[c * n + k]);
      }
    const T p = a[c * n + c];
    for (int k = 0; k < n; ++k) {
      a[c * n + k] = a[c * n + k] / p;
      inv[c * n + k] = inv[c * n + k] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const T f = a[r * n + c];
      if (value_of(f) == 0.0 && std::is_same_v<T, double>) continue;
      for (int k = 0; k < n; ++k) {
        a[r * n + k] = a[r * n + k] - f * a[c * n + k];
        inv[r * n + k] = inv[r * n + k] - f * inv[c * n + k];
      }
    }
  }
  return true;
}

// Signs of the pivots of a symmetric LDL^T factorization with diagonal pivoting and 2x2
// blocks where the diagonal is too small. Pivots within rel_tol of the scale count as zero.
struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
  double min_pivot = 0.0;  // smallest 1x1 pivot magnitude seen, relative units of the matrix
};
Inertia inertia(std::vector<double> a, int n, double rel_tol = kPivotRelTol);

// All pivots of a diagonally pivoted Cholesky-type elimination exceed `tol` (absolute).
bool positive_definite(std::vector<double> a, int n, double tol = kPivotRelTol);

// Rank by full-pivot elimination with a threshold relative to the largest entry.
int numeric_rank(std::vector<double> a, int rows, int cols, double rel_tol = kPivotRelTol);

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n);
double max_abs_identity_defect(const std::vector<double>& a, int n);

}  // namespace algcalc
