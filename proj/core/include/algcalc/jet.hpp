#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace algcalc {

inline constexpr int kMaxJetOrder = 3;

// Truncated Taylor jet over a fixed variable list: value plus all partials up to `order`.
// Layout is [value | gradient n | hessian n*n | third n*n*n], so a lower-order jet is a
// prefix of a higher-order one. Higher derivative arrays are written through the canonical
// sorted index and mirrored, which keeps them exactly symmetric.
class Jet {
 public:
  Jet() : data_(1, 0.0) {}
  Jet(int nvars, int order, double value = 0.0);

  static Jet constant(int nvars, int order, double value) { return Jet(nvars, order, value); }
  static Jet variable(int nvars, int order, int index, double value);

  int nvars() const { return n_; }
  int order() const { return order_; }

  double value() const { return data_[0]; }
  double d(int i) const { return data_[1 + i]; }
  double d(int i, int j) const { return data_[h0() + i * n_ + j]; }
  double d(int i, int j, int k) const { return data_[t0() + (i * n_ + j) * n_ + k]; }

  void set_value(double v) { data_[0] = v; }
  void set_d(int i, double v) { data_[1 + i] = v; }
  void set_d(int i, int j, double v) {
    data_[h0() + i * n_ + j] = v;
    data_[h0() + j * n_ + i] = v;
  }
  void set_d(int i, int j, int k, double v);

  // Derivative with respect to one variable; the result has order one lower.
  Jet partial(int var) const;
  Jet truncated(int order) const;

  std::span<const double> raw() const { return data_; }
  std::span<double> raw_mut() { return data_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);

 private:
  std::size_t h0() const { return 1 + static_cast<std::size_t>(n_); }
  std::size_t t0() const { return h0() + static_cast<std::size_t>(n_) * n_; }

  int n_ = 0;
  int order_ = 0;
  std::vector<double> data_;
};

std::size_t jet_storage_size(int nvars, int order);

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator-(const Jet& a);
Jet operator+(const Jet& a, double b);
Jet operator+(double a, const Jet& b);
Jet operator-(const Jet& a, double b);
Jet operator-(double a, const Jet& b);
Jet operator*(const Jet& a, double b);
Jet operator*(double a, const Jet& b);
Jet operator/(const Jet& a, double b);

Jet sin(const Jet& u);
Jet cos(const Jet& u);
Jet tan(const Jet& u);
Jet exp(const Jet& u);
Jet log(const Jet& u);
Jet sqrt(const Jet& u);
Jet abs(const Jet& u);
Jet reciprocal(const Jet& u);
// a^b through exp(b ln a); requires a > 0.
Jet real_pow(const Jet& a, const Jet& b);

// Applies a unary function given its value and first three derivatives at u.value().
Jet chain(const Jet& u, double f0, double f1, double f2, double f3);

// Integer power by binary exponentiation. Shared between double and Jet so that order-0
// jets reproduce the plain evaluation bit for bit.
template <class T>
T ipow(const T& base, long long n, const T& one) {
  if (n < 0) return one / ipow(base, -n, one);
  T result = one;
  T b = base;
  bool have = false;
  while (n > 0) {
    if (n & 1) {
      result = have ? result * b : b;
      have = true;
    }
    n >>= 1;
    if (n > 0) b = b * b;
  }
  return result;
}

}  // namespace algcalc
