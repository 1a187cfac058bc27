#include "algcalc/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "algcalc/error.hpp"

namespace algcalc {

namespace {

int common_nvars(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars())
    throw DimensionMismatch("jet variable counts differ: " + std::to_string(a.nvars()) +
                            " vs " + std::to_string(b.nvars()));
  return a.nvars();
}

}  // namespace

std::size_t jet_storage_size(int nvars, int order) {
  std::size_t n = static_cast<std::size_t>(nvars);
  std::size_t s = 1;
  if (order >= 1) s += n;
  if (order >= 2) s += n * n;
  if (order >= 3) s += n * n * n;
  return s;
}

Jet::Jet(int nvars, int order, double value) : n_(nvars), order_(order) {
  if (order < 0 || order > kMaxJetOrder)
    throw OrderExceeded("jet order " + std::to_string(order) + " outside 0.." +
                        std::to_string(kMaxJetOrder));
  if (nvars < 0) throw DimensionMismatch("negative variable count");
  data_.assign(jet_storage_size(nvars, order), 0.0);
  data_[0] = value;
}

Jet Jet::variable(int nvars, int order, int index, double value) {
  Jet j(nvars, order, value);
  if (index < 0 || index >= nvars) throw IndexOutOfRange("jet variable index out of range");
  if (order >= 1) j.data_[1 + index] = 1.0;
  return j;
}

void Jet::set_d(int i, int j, int k, double v) {
  const std::size_t n = n_;
  auto at = [&](int a, int b, int c) -> double& { return data_[t0() + (a * n + b) * n + c]; };
  at(i, j, k) = v;
  at(i, k, j) = v;
  at(j, i, k) = v;
  at(j, k, i) = v;
  at(k, i, j) = v;
  at(k, j, i) = v;
}

Jet Jet::partial(int var) const {
  if (order_ < 1) throw OrderExceeded("partial of an order-0 jet");
  if (var < 0 || var >= n_) throw IndexOutOfRange("partial variable index out of range");
  Jet r(n_, order_ - 1, d(var));
  if (r.order_ >= 1)
    for (int i = 0; i < n_; ++i) r.data_[1 + i] = d(var, i);
  if (r.order_ >= 2)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r.data_[r.h0() + i * n_ + j] = d(var, i, j);
  return r;
}

Jet Jet::truncated(int order) const {
  if (order > order_) throw OrderExceeded("cannot raise jet order by truncation");
  Jet r(n_, order);
  std::copy_n(data_.begin(), r.data_.size(), r.data_.begin());
  return r;
}

Jet& Jet::operator+=(const Jet& o) { return *this = *this + o; }
Jet& Jet::operator-=(const Jet& o) { return *this = *this - o; }
Jet& Jet::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Jet operator+(const Jet& a, const Jet& b) {
  const int n = common_nvars(a, b);
  Jet r(n, std::min(a.order(), b.order()));
  auto ra = a.raw(), rb = b.raw();
  auto out = r.raw_mut();
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = ra[t] + rb[t];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  const int n = common_nvars(a, b);
  Jet r(n, std::min(a.order(), b.order()));
  auto ra = a.raw(), rb = b.raw();
  auto out = r.raw_mut();
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = ra[t] - rb[t];
  return r;
}

Jet operator-(const Jet& a) {
  Jet r = a;
  for (double& v : r.raw_mut()) v = -v;
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  const int n = common_nvars(a, b);
  const int k = std::min(a.order(), b.order());
  Jet r(n, k, a.value() * b.value());
  const double av = a.value(), bv = b.value();
  if (k >= 1)
    for (int i = 0; i < n; ++i) r.set_d(i, a.d(i) * bv + av * b.d(i));
  if (k >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        r.set_d(i, j, a.d(i, j) * bv + a.d(i) * b.d(j) + a.d(j) * b.d(i) + av * b.d(i, j));
  if (k >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int l = j; l < n; ++l)
          r.set_d(i, j, l,
                  a.d(i, j, l) * bv + a.d(i, j) * b.d(l) + a.d(i, l) * b.d(j) +
                      a.d(j, l) * b.d(i) + a.d(i) * b.d(j, l) + a.d(j) * b.d(i, l) +
                      a.d(l) * b.d(i, j) + av * b.d(i, j, l));
  return r;
}

Jet chain(const Jet& u, double f0, double f1, double f2, double f3) {
  const int n = u.nvars();
  const int k = u.order();
  Jet r(n, k, f0);
  if (k >= 1)
    for (int i = 0; i < n; ++i) r.set_d(i, f1 * u.d(i));
  if (k >= 2)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) r.set_d(i, j, f2 * u.d(i) * u.d(j) + f1 * u.d(i, j));
  if (k >= 3)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int l = j; l < n; ++l)
          r.set_d(i, j, l,
                  f3 * u.d(i) * u.d(j) * u.d(l) +
                      f2 * (u.d(i, j) * u.d(l) + u.d(i, l) * u.d(j) + u.d(j, l) * u.d(i)) +
                      f1 * u.d(i, j, l));
  return r;
}

Jet reciprocal(const Jet& u) {
  const double v = u.value();
  if (v == 0.0) throw NonSmoothPoint("division by zero");
  const double inv = 1.0 / v;
  return chain(u, inv, -inv * inv, 2.0 * inv * inv * inv, -6.0 * inv * inv * inv * inv);
}

Jet operator/(const Jet& a, const Jet& b) {
  common_nvars(a, b);
  Jet r = a * reciprocal(b);
  r.set_value(a.value() / b.value());
  return r;
}

Jet operator+(const Jet& a, double b) {
  Jet r = a;
  r.set_value(a.value() + b);
  return r;
}
Jet operator+(double a, const Jet& b) {
  Jet r = b;
  r.set_value(a + b.value());
  return r;
}
Jet operator-(const Jet& a, double b) {
  Jet r = a;
  r.set_value(a.value() - b);
  return r;
}
Jet operator-(double a, const Jet& b) {
  Jet r = -b;
  r.set_value(a - b.value());
  return r;
}
Jet operator*(const Jet& a, double b) {
  Jet r = a;
  for (double& v : r.raw_mut()) v *= b;
  return r;
}
Jet operator*(double a, const Jet& b) {
  Jet r = b;
  for (double& v : r.raw_mut()) v = a * v;
  return r;
}
Jet operator/(const Jet& a, double b) {
  if (b == 0.0) throw NonSmoothPoint("division by zero");
  Jet r = a;
  for (double& v : r.raw_mut()) v /= b;
  return r;
}

Jet sin(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return chain(u, s, c, -s, -c);
}

Jet cos(const Jet& u) {
  const double s = std::sin(u.value()), c = std::cos(u.value());
  return chain(u, c, -s, -c, s);
}

Jet tan(const Jet& u) {
  const double t = std::tan(u.value());
  const double sec2 = 1.0 + t * t;
  return chain(u, t, sec2, 2.0 * t * sec2, 2.0 * sec2 * (1.0 + 3.0 * t * t));
}

Jet exp(const Jet& u) {
  const double e = std::exp(u.value());
  return chain(u, e, e, e, e);
}

Jet log(const Jet& u) {
  const double v = u.value();
  if (!(v > 0.0)) throw NonSmoothPoint("ln of non-positive argument");
  const double inv = 1.0 / v;
  return chain(u, std::log(v), inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet sqrt(const Jet& u) {
  const double v = u.value();
  if (v < 0.0) throw NonSmoothPoint("sqrt of negative argument");
  if (v == 0.0 && u.order() >= 1) throw NonSmoothPoint("derivative of sqrt at 0");
  const double s = std::sqrt(v);
  if (u.order() == 0) return chain(u, s, 0.0, 0.0, 0.0);
  return chain(u, s, 0.5 / s, -0.25 / (s * v), 0.375 / (s * v * v));
}

Jet abs(const Jet& u) {
  const double v = u.value();
  if (v == 0.0 && u.order() >= 1) throw NonSmoothPoint("derivative of abs at its kink");
  return chain(u, std::fabs(v), v > 0.0 ? 1.0 : -1.0, 0.0, 0.0);
}

Jet real_pow(const Jet& a, const Jet& b) {
  if (!(a.value() > 0.0)) throw NonSmoothPoint("non-integer power of non-positive base");
  return exp(b * log(a));
}

}  // namespace algcalc
