#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "algcalc/jet.hpp"

namespace algcalc {

// Total-space dimensions: m base coordinates x, r fiber coordinates y. Jets use (x, y) order.
struct Dims {
  int m = 0;
  int r = 0;
  int nvars() const { return m + r; }
  bool operator==(const Dims&) const = default;
};

struct Point {
  std::vector<double> x;
  std::vector<double> y;
  bool operator==(const Point&) const = default;
};

std::string to_string(const Point& p);

// Bit set over the (x, y) variable list.
using DependenceMask = std::uint64_t;
inline constexpr int kMaxVariables = 64;
DependenceMask all_variables(Dims dims);
DependenceMask x_variables(Dims dims);

void check_point(Dims dims, const Point& p);
Jet coordinate_jet(Dims dims, const Point& p, int var, int order);

inline constexpr double kDefaultFdStep = 1e-5;

// Immutable, shareable scalar field on the total space.
class ScalarField {
 public:
  using Evaluator = std::function<Jet(const Point&, int order)>;

  ScalarField();
  ScalarField(Dims dims, DependenceMask deps, Evaluator eval);

  static ScalarField constant(Dims dims, double value);
  static ScalarField zero(Dims dims) { return constant(dims, 0.0); }
  static ScalarField coordinate(Dims dims, int var);

  // Validates the point and order, then evaluates.
  Jet eval(const Point& p, int order) const;
  double value(const Point& p) const { return eval(p, 0).value(); }

  Dims dims() const { return dims_; }
  DependenceMask dependence() const { return deps_; }
  bool depends_on(int var) const { return (deps_ >> var) & 1u; }
  bool x_only() const { return (deps_ & ~x_variables(dims_)) == 0; }
  // Known constant value, if the field was built as a constant.
  const double* constant_value() const { return is_constant_ ? &constant_ : nullptr; }

 private:
  Dims dims_;
  DependenceMask deps_ = 0;
  std::shared_ptr<const Evaluator> eval_;
  bool is_constant_ = false;
  double constant_ = 0.0;
};

Jet eval_jet(const ScalarField& f, const Point& p, int order);

// Central difference (f(p+h e) - f(p-h e)) / 2h. Test oracle only.
double fd_partial(const ScalarField& f, const Point& p, int var, double step = kDefaultFdStep);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

// Derived field whose value is the partial of `f` with respect to one variable.
ScalarField partial_field(const ScalarField& f, int var);

// A bundle of fields evaluated together, so shared intermediates are computed once.
class FieldArray {
 public:
  using Evaluator = std::function<std::vector<Jet>(const Point&, int order)>;

  FieldArray() = default;
  FieldArray(Dims dims, std::size_t size, Evaluator eval, DependenceMask deps);
  static FieldArray from_fields(Dims dims, std::vector<ScalarField> fields);

  std::vector<Jet> eval(const Point& p, int order) const;
  std::size_t size() const { return size_; }
  Dims dims() const { return dims_; }
  DependenceMask dependence() const { return deps_; }
  ScalarField component(std::size_t i) const;
  std::vector<ScalarField> components() const;

 private:
  Dims dims_;
  std::size_t size_ = 0;
  DependenceMask deps_ = 0;
  std::shared_ptr<const Evaluator> eval_;
  std::shared_ptr<const std::vector<ScalarField>> fields_;
};

std::vector<Jet> eval_all(const std::vector<ScalarField>& fields, const Point& p, int order);
DependenceMask union_dependence(const std::vector<ScalarField>& fields);

}  // namespace algcalc
