#include "algcalc/linalg.hpp"

#include <algorithm>

namespace algcalc {

Inertia inertia(std::vector<double> a, int n, double rel_tol) {
  Inertia out;
  out.min_pivot = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) {
    out.zero = n;
    out.min_pivot = 0.0;
    return out;
  }
  const double zero_tol = rel_tol * scale;
  std::vector<int> live(n);
  for (int i = 0; i < n; ++i) live[i] = i;
  auto at = [&](int i, int j) -> double& { return a[i * n + j]; };
  constexpr double kAlpha = 0.6404;  // (1 + sqrt 17) / 8
  while (!live.empty()) {
    int kd = live[0];
    for (int i : live)
      if (std::fabs(at(i, i)) > std::fabs(at(kd, kd))) kd = i;
    int oi = -1, oj = -1;
    double off = 0.0;
    for (std::size_t s = 0; s < live.size(); ++s)
      for (std::size_t t = s + 1; t < live.size(); ++t)
        if (std::fabs(at(live[s], live[t])) > off) {
          off = std::fabs(at(live[s], live[t]));
          oi = live[s];
          oj = live[t];
        }
    if (live.size() == 1 || std::fabs(at(kd, kd)) >= kAlpha * off) {
      const double d = at(kd, kd);
      out.min_pivot = std::min(out.min_pivot, std::fabs(d) / scale);
      live.erase(std::find(live.begin(), live.end(), kd));
      if (std::fabs(d) <= zero_tol) {
        ++out.zero;
        continue;
      }
      (d > 0 ? out.positive : out.negative) += 1;
      for (int i : live)
        for (int j : live) at(i, j) -= at(i, kd) * at(kd, j) / d;
    } else {
      const double b11 = at(oi, oi), b12 = at(oi, oj), b22 = at(oj, oj);
      const double det = b11 * b22 - b12 * b12;
      live.erase(std::find(live.begin(), live.end(), oi));
      live.erase(std::find(live.begin(), live.end(), oj));
      if (det < 0) {
        ++out.positive;
        ++out.negative;
      } else {
        (b11 + b22 > 0 ? out.positive : out.negative) += 2;
      }
      const double i11 = b22 / det, i12 = -b12 / det, i22 = b11 / det;
      for (int i : live) {
        const double ui = at(i, oi), uj = at(i, oj);
        for (int j : live) {
          const double vi = at(oi, j), vj = at(oj, j);
          at(i, j) -= ui * (i11 * vi + i12 * vj) + uj * (i12 * vi + i22 * vj);
        }
      }
    }
  }
  if (!std::isfinite(out.min_pivot)) out.min_pivot = 0.0;
  return out;
}

bool positive_definite(std::vector<double> a, int n, double tol) {
  std::vector<int> live(n);
  for (int i = 0; i < n; ++i) live[i] = i;
  auto at = [&](int i, int j) -> double& { return a[i * n + j]; };
  while (!live.empty()) {
    int k = live[0];
    for (int i : live)
      if (at(i, i) > at(k, k)) k = i;
    const double d = at(k, k);
    if (!(d > tol)) return false;
    live.erase(std::find(live.begin(), live.end(), k));
    for (int i : live)
      for (int j : live) at(i, j) -= at(i, k) * at(k, j) / d;
  }
  return true;
}

int numeric_rank(std::vector<double> a, int rows, int cols, double rel_tol) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  if (scale == 0.0) return 0;
  auto at = [&](int i, int j) -> double& { return a[i * cols + j]; };
  int rank = 0;
  std::vector<bool> row_used(rows, false), col_used(cols, false);
  for (int step = 0; step < std::min(rows, cols); ++step) {
    int pr = -1, pc = -1;
    double best = 0.0;
    for (int i = 0; i < rows; ++i) {
      if (row_used[i]) continue;
      for (int j = 0; j < cols; ++j)
        if (!col_used[j] && std::fabs(at(i, j)) > best) {
          best = std::fabs(at(i, j));
          pr = i;
          pc = j;
        }
    }
    if (pr < 0 || best <= rel_tol * scale) break;
    ++rank;
    row_used[pr] = true;
    col_used[pc] = true;
    for (int i = 0; i < rows; ++i) {
      if (row_used[i]) continue;
      const double f = at(i, pc) / at(pr, pc);
      for (int j = 0; j < cols; ++j) at(i, j) -= f * at(pr, j);
    }
  }
  return rank;
}

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
  return c;
}

double max_abs_identity_defect(const std::vector<double>& a, int n) {
  double m = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m = std::max(m, std::fabs(a[i * n + j] - (i == j ? 1.0 : 0.0)));
  return m;
}

}  // namespace algcalc
