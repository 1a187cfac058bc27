#include "algcalc/field.hpp"

#include <cmath>
#include <cstdio>

#include "algcalc/error.hpp"

namespace algcalc {

std::string to_string(const Point& p) {
  std::string s = "(";
  char buf[32];
  bool first = true;
  for (const auto* v : {&p.x, &p.y})
    for (double c : *v) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      if (!first) s += ", ";
      s += buf;
      first = false;
    }
  return s + ")";
}

DependenceMask all_variables(Dims dims) {
  const int n = dims.nvars();
  return n >= 64 ? ~DependenceMask{0} : ((DependenceMask{1} << n) - 1);
}

DependenceMask x_variables(Dims dims) {
  return dims.m >= 64 ? ~DependenceMask{0} : ((DependenceMask{1} << dims.m) - 1);
}

void check_point(Dims dims, const Point& p) {
  if (static_cast<int>(p.x.size()) != dims.m || static_cast<int>(p.y.size()) != dims.r)
    throw DimensionMismatch("point has " + std::to_string(p.x.size()) + "+" +
                            std::to_string(p.y.size()) + " coordinates, expected " +
                            std::to_string(dims.m) + "+" + std::to_string(dims.r));
  for (const auto* v : {&p.x, &p.y})
    for (double c : *v)
      if (!std::isfinite(c)) throw DimensionMismatch("point has a non-finite coordinate");
}

Jet coordinate_jet(Dims dims, const Point& p, int var, int order) {
  const double v = var < dims.m ? p.x[var] : p.y[var - dims.m];
  return Jet::variable(dims.nvars(), order, var, v);
}

ScalarField::ScalarField() : ScalarField(constant(Dims{}, 0.0)) {}

ScalarField::ScalarField(Dims dims, DependenceMask deps, Evaluator eval)
    : dims_(dims), deps_(deps), eval_(std::make_shared<const Evaluator>(std::move(eval))) {
  if (dims.m < 0 || dims.r < 0 || dims.nvars() > kMaxVariables)
    throw DimensionMismatch("unsupported field dimensions");
}

ScalarField ScalarField::constant(Dims dims, double value) {
  const int n = dims.nvars();
  ScalarField f(dims, 0, [n, value](const Point&, int order) { return Jet(n, order, value); });
  f.is_constant_ = true;
  f.constant_ = value;
  return f;
}

ScalarField ScalarField::coordinate(Dims dims, int var) {
  if (var < 0 || var >= dims.nvars()) throw IndexOutOfRange("coordinate index out of range");
  return ScalarField(dims, DependenceMask{1} << var, [dims, var](const Point& p, int order) {
    return coordinate_jet(dims, p, var, order);
  });
}

Jet ScalarField::eval(const Point& p, int order) const {
  if (order < 0 || order > kMaxJetOrder)
    throw OrderExceeded("requested jet order " + std::to_string(order));
  check_point(dims_, p);
  return (*eval_)(p, order);
}

Jet eval_jet(const ScalarField& f, const Point& p, int order) { return f.eval(p, order); }

double fd_partial(const ScalarField& f, const Point& p, int var, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const Dims d = f.dims();
  if (var < 0 || var >= d.nvars()) throw IndexOutOfRange("fd variable index out of range");
  Point plus = p, minus = p;
  double& cp = var < d.m ? plus.x[var] : plus.y[var - d.m];
  double& cm = var < d.m ? minus.x[var] : minus.y[var - d.m];
  cp += step;
  cm -= step;
  return (f.value(plus) - f.value(minus)) / (2.0 * step);
}

namespace {

Dims common_dims(const ScalarField& a, const ScalarField& b) {
  if (!(a.dims() == b.dims())) throw DimensionMismatch("fields have different dimensions");
  return a.dims();
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_dims(a, b), a.dependence() | b.dependence(),
                     [a, b](const Point& p, int k) { return a.eval(p, k) + b.eval(p, k); });
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_dims(a, b), a.dependence() | b.dependence(),
                     [a, b](const Point& p, int k) { return a.eval(p, k) - b.eval(p, k); });
}

ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return ScalarField(common_dims(a, b), a.dependence() | b.dependence(),
                     [a, b](const Point& p, int k) { return a.eval(p, k) * b.eval(p, k); });
}

ScalarField operator*(double s, const ScalarField& a) {
  return ScalarField(a.dims(), a.dependence(),
                     [s, a](const Point& p, int k) { return s * a.eval(p, k); });
}

ScalarField partial_field(const ScalarField& f, int var) {
  if (var < 0 || var >= f.dims().nvars()) throw IndexOutOfRange("partial variable out of range");
  return ScalarField(f.dims(), f.dependence(), [f, var](const Point& p, int k) {
    return f.eval(p, k + 1).partial(var);
  });
}

FieldArray::FieldArray(Dims dims, std::size_t size, Evaluator eval, DependenceMask deps)
    : dims_(dims), size_(size), deps_(deps),
      eval_(std::make_shared<const Evaluator>(std::move(eval))) {}

FieldArray FieldArray::from_fields(Dims dims, std::vector<ScalarField> fields) {
  for (const auto& f : fields)
    if (!(f.dims() == dims)) throw DimensionMismatch("field array member has wrong dimensions");
  auto shared = std::make_shared<const std::vector<ScalarField>>(std::move(fields));
  FieldArray a(dims, shared->size(),
               [shared](const Point& p, int k) { return eval_all(*shared, p, k); },
               union_dependence(*shared));
  a.fields_ = shared;
  return a;
}

std::vector<Jet> FieldArray::eval(const Point& p, int order) const {
  if (order < 0 || order > kMaxJetOrder)
    throw OrderExceeded("requested jet order " + std::to_string(order));
  check_point(dims_, p);
  if (size_ == 0) return {};
  auto out = (*eval_)(p, order);
  if (out.size() != size_) throw DimensionMismatch("field array evaluator returned wrong size");
  return out;
}

ScalarField FieldArray::component(std::size_t i) const {
  if (i >= size_) throw IndexOutOfRange("field array component out of range");
  if (fields_) return (*fields_)[i];
  FieldArray self = *this;
  return ScalarField(dims_, deps_, [self, i](const Point& p, int k) { return self.eval(p, k)[i]; });
}

std::vector<ScalarField> FieldArray::components() const {
  std::vector<ScalarField> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back(component(i));
  return out;
}

std::vector<Jet> eval_all(const std::vector<ScalarField>& fields, const Point& p, int order) {
  std::vector<Jet> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(f.eval(p, order));
  return out;
}

DependenceMask union_dependence(const std::vector<ScalarField>& fields) {
  DependenceMask m = 0;
  for (const auto& f : fields) m |= f.dependence();
  return m;
}

}  // namespace algcalc
