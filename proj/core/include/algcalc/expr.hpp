#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "algcalc/field.hpp"

namespace algcalc {

enum class Func { Sin, Cos, Tan, Exp, Ln, Sqrt, Abs, Pow };
enum class NodeKind { Number, Variable, Constant, Neg, Add, Sub, Mul, Div, Pow, Call };

struct ExprNode {
  NodeKind kind = NodeKind::Number;
  double number = 0.0;       // Number, and the value of Constant
  int var = -1;              // Variable: index into (x, y)
  std::string name;          // Constant: "pi" or "e"
  Func func = Func::Sin;     // Call
  std::vector<std::shared_ptr<const ExprNode>> args;
  // Power nodes (operator ^ and pow()): an exponent free of variables with an integer value
  // takes the exact integer-power path.
  bool integer_exponent = false;
  long long exponent = 0;
};

class Expr {
 public:
  Expr(std::shared_ptr<const ExprNode> root, Dims dims);

  const ExprNode& root() const { return *root_; }
  std::shared_ptr<const ExprNode> root_ptr() const { return root_; }
  Dims dims() const { return dims_; }
  // Variables that occur syntactically.
  DependenceMask dependence() const { return deps_; }

 private:
  std::shared_ptr<const ExprNode> root_;
  Dims dims_;
  DependenceMask deps_ = 0;
};

Expr parse(std::string_view source, Dims dims);
std::string print(const Expr& e);
bool structurally_equal(const Expr& a, const Expr& b);

double evaluate(const Expr& e, const Point& p);
Jet evaluate_jet(const Expr& e, const Point& p, int order);

ScalarField to_field(const Expr& e);
ScalarField parse_field(std::string_view source, Dims dims);

const char* func_name(Func f);

}  // namespace algcalc
