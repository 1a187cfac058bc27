#include "algcalc/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <optional>

#include "algcalc/error.hpp"

namespace algcalc {

const char* func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tan: return "tan";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    case Func::Pow: return "pow";
  }
  return "?";
}

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

DependenceMask collect_deps(const ExprNode& n) {
  DependenceMask m = n.kind == NodeKind::Variable ? (DependenceMask{1} << n.var) : 0;
  for (const auto& a : n.args) m |= collect_deps(*a);
  return m;
}

// ---- tokenizer -------------------------------------------------------------

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of input";
    case Tok::Number: return "number '" + std::string(t.text) + "'";
    case Tok::Ident: return "identifier '" + std::string(t.text) + "'";
    default: return "'" + std::string(t.text) + "'";
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (is_digit(c) || (c == '.' && i + 1 < s.size() && is_digit(s[i + 1]))) {
      while (i < s.size() && is_digit(s[i])) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && is_digit(s[i])) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j < s.size() && is_digit(s[j])) {
          i = j;
          while (i < s.size() && is_digit(s[i])) ++i;
        }
      }
      Token t{Tok::Number, start, s.substr(start, i - start)};
      // from_chars does not accept a leading '.', so parse "0" + text in that case.
      std::string buf = t.text.front() == '.' ? "0" + std::string(t.text) : std::string(t.text);
      auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), t.number);
      if (ec != std::errc() || ptr != buf.data() + buf.size() || !std::isfinite(t.number))
        throw SyntaxError(start, {"finite number"}, "'" + std::string(t.text) + "'");
      out.push_back(t);
      continue;
    }
    if (is_ident_start(c)) {
      while (i < s.size() && is_ident_char(s[i])) ++i;
      out.push_back(Token{Tok::Ident, start, s.substr(start, i - start)});
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      default:
        throw SyntaxError(start, {"number", "identifier", "operator", "'('", "')'", "','"},
                          "character '" + std::string(1, c) + "'");
    }
    out.push_back(Token{k, start, s.substr(start, 1)});
    ++i;
  }
  out.push_back(Token{Tok::End, s.size(), {}});
  return out;
}

// ---- parser ----------------------------------------------------------------

std::optional<Func> lookup_func(std::string_view name) {
  static constexpr std::pair<std::string_view, Func> table[] = {
      {"sin", Func::Sin}, {"cos", Func::Cos},   {"tan", Func::Tan}, {"exp", Func::Exp},
      {"ln", Func::Ln},   {"sqrt", Func::Sqrt}, {"abs", Func::Abs}, {"pow", Func::Pow}};
  for (const auto& [n, f] : table)
    if (n == name) return f;
  return std::nullopt;
}

int func_arity(Func f) { return f == Func::Pow ? 2 : 1; }

std::optional<int> lookup_variable(std::string_view name, Dims dims) {
  if (name.size() < 2 || (name[0] != 'x' && name[0] != 'y')) return std::nullopt;
  if (name[1] == '0') return std::nullopt;
  int idx = 0;
  auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
  if (ec != std::errc() || ptr != name.data() + name.size()) return std::nullopt;
  if (name[0] == 'x') return idx <= dims.m ? std::optional<int>(idx - 1) : std::nullopt;
  return idx <= dims.r ? std::optional<int>(dims.m + idx - 1) : std::nullopt;
}

bool has_variables(const ExprNode& n) {
  if (n.kind == NodeKind::Variable) return true;
  for (const auto& a : n.args)
    if (has_variables(*a)) return true;
  return false;
}

double eval_constant(const ExprNode& n);

// Decides the integer-power path for a power node whose exponent is args[1].
void classify_exponent(ExprNode& n) {
  const ExprNode& ex = *n.args[1];
  if (has_variables(ex)) return;
  double v;
  try {
    v = eval_constant(ex);
  } catch (const NonSmoothPoint&) {
    return;  // left for evaluation time to report
  }
  if (std::isfinite(v) && v == std::nearbyint(v) && std::fabs(v) <= 1e9) {
    n.integer_exponent = true;
    n.exponent = static_cast<long long>(v);
  }
}

class Parser {
 public:
  Parser(std::string_view src, Dims dims) : toks_(tokenize(src)), dims_(dims) {}

  NodePtr parse_all() {
    NodePtr e = expr();
    if (peek().kind != Tok::End)
      fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& take() { return toks_[pos_++]; }
  [[noreturn]] void fail(std::vector<std::string> expected) const {
    throw SyntaxError(peek().offset, std::move(expected), describe(peek()));
  }

  static NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->args = {std::move(a), std::move(b)};
    if (k == NodeKind::Pow) classify_exponent(*n);
    return n;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const NodeKind k = take().kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      lhs = binary(k, lhs, term());
    }
    return lhs;
  }

  NodePtr term() {
    NodePtr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const NodeKind k = take().kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      lhs = binary(k, lhs, unary());
    }
    return lhs;
  }

  NodePtr unary() {
    if (peek().kind == Tok::Minus) {
      take();
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Neg;
      n->args = {unary()};
      return n;
    }
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (peek().kind == Tok::Caret) {
      take();
      return binary(NodeKind::Pow, base, unary());
    }
    return base;
  }

  NodePtr primary() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      take();
      auto n = std::make_shared<ExprNode>();
      n->kind = NodeKind::Number;
      n->number = t.number;
      return n;
    }
    if (t.kind == Tok::LParen) {
      take();
      NodePtr e = expr();
      if (peek().kind != Tok::RParen) fail({"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
      take();
      return e;
    }
    if (t.kind == Tok::Ident) {
      take();
      if (peek().kind == Tok::LParen) return call(t);
      if (auto v = lookup_variable(t.text, dims_)) {
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::Variable;
        n->var = *v;
        return n;
      }
      if (t.text == "pi" || t.text == "e") {
        auto n = std::make_shared<ExprNode>();
        n->kind = NodeKind::Constant;
        n->name = std::string(t.text);
        n->number = t.text == "pi" ? std::numbers::pi : std::numbers::e;
        return n;
      }
      if (lookup_func(t.text)) fail({"'('"});
      throw UnknownIdentifier(std::string(t.text), t.offset);
    }
    fail({"number", "variable", "constant", "function", "'('", "'-'"});
  }

  NodePtr call(const Token& name) {
    auto f = lookup_func(name.text);
    if (!f) throw UnknownIdentifier(std::string(name.text), name.offset);
    take();  // '('
    std::vector<NodePtr> args;
    if (peek().kind != Tok::RParen) {
      args.push_back(expr());
      while (peek().kind == Tok::Comma) {
        take();
        args.push_back(expr());
      }
    }
    if (peek().kind != Tok::RParen) fail({"')'", "','", "'+'", "'-'", "'*'", "'/'", "'^'"});
    take();
    if (static_cast<int>(args.size()) != func_arity(*f))
      throw ArityError(std::string(func_name(*f)) + " takes " + std::to_string(func_arity(*f)) +
                       " argument(s), got " + std::to_string(args.size()) + " at offset " +
                       std::to_string(name.offset));
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->func = *f;
    n->args = std::move(args);
    if (*f == Func::Pow) classify_exponent(*n);
    return n;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Dims dims_;
};

// ---- evaluation ------------------------------------------------------------
// One templated evaluator serves doubles and jets; the kernels below keep the order-0 jet
// values identical to the plain double computation.

double k_div(double a, double b) {
  if (b == 0.0) throw NonSmoothPoint("division by zero");
  return a / b;
}
Jet k_div(const Jet& a, const Jet& b) { return a / b; }
double k_sin(double a) { return std::sin(a); }
Jet k_sin(const Jet& a) { return sin(a); }
double k_cos(double a) { return std::cos(a); }
Jet k_cos(const Jet& a) { return cos(a); }
double k_tan(double a) { return std::tan(a); }
Jet k_tan(const Jet& a) { return tan(a); }
double k_exp(double a) { return std::exp(a); }
Jet k_exp(const Jet& a) { return exp(a); }
double k_ln(double a) {
  if (!(a > 0.0)) throw NonSmoothPoint("ln of non-positive argument");
  return std::log(a);
}
Jet k_ln(const Jet& a) { return log(a); }
double k_sqrt(double a) {
  if (a < 0.0) throw NonSmoothPoint("sqrt of negative argument");
  return std::sqrt(a);
}
Jet k_sqrt(const Jet& a) { return sqrt(a); }
double k_abs(double a) { return std::fabs(a); }
Jet k_abs(const Jet& a) { return abs(a); }
double k_rpow(double a, double b) {
  if (!(a > 0.0)) throw NonSmoothPoint("non-integer power of non-positive base");
  return std::exp(b * std::log(a));
}
Jet k_rpow(const Jet& a, const Jet& b) { return real_pow(a, b); }
double value_of(double a) { return a; }
double value_of(const Jet& a) { return a.value(); }

struct DoubleCtx {
  const Point* p;
  int m;
  double constant(double v) const { return v; }
  double variable(int var) const { return var < m ? p->x[var] : p->y[var - m]; }
};

struct JetCtx {
  const Point* p;
  Dims dims;
  int order;
  Jet constant(double v) const { return Jet(dims.nvars(), order, v); }
  Jet variable(int var) const { return coordinate_jet(dims, *p, var, order); }
};

template <class T, class Ctx>
T power_of(const ExprNode& n, const T& base, const Ctx& ctx);

template <class T, class Ctx>
T eval_node(const ExprNode& n, const Ctx& ctx) {
  switch (n.kind) {
    case NodeKind::Number:
    case NodeKind::Constant: return ctx.constant(n.number);
    case NodeKind::Variable: return ctx.variable(n.var);
    case NodeKind::Neg: return -eval_node<T>(*n.args[0], ctx);
    case NodeKind::Add: return eval_node<T>(*n.args[0], ctx) + eval_node<T>(*n.args[1], ctx);
    case NodeKind::Sub: return eval_node<T>(*n.args[0], ctx) - eval_node<T>(*n.args[1], ctx);
    case NodeKind::Mul: return eval_node<T>(*n.args[0], ctx) * eval_node<T>(*n.args[1], ctx);
    case NodeKind::Div: return k_div(eval_node<T>(*n.args[0], ctx), eval_node<T>(*n.args[1], ctx));
    case NodeKind::Pow: return power_of<T>(n, eval_node<T>(*n.args[0], ctx), ctx);
    case NodeKind::Call: {
      const T a = eval_node<T>(*n.args[0], ctx);
      switch (n.func) {
        case Func::Sin: return k_sin(a);
        case Func::Cos: return k_cos(a);
        case Func::Tan: return k_tan(a);
        case Func::Exp: return k_exp(a);
        case Func::Ln: return k_ln(a);
        case Func::Sqrt: return k_sqrt(a);
        case Func::Abs: return k_abs(a);
        case Func::Pow: return power_of<T>(n, a, ctx);
      }
    }
  }
  throw std::logic_error("unhandled expression node");
}

template <class T, class Ctx>
T power_of(const ExprNode& n, const T& base, const Ctx& ctx) {
  if (n.integer_exponent) {
    if (n.exponent < 0 && value_of(base) == 0.0) throw NonSmoothPoint("division by zero");
    return ipow(base, n.exponent, ctx.constant(1.0));
  }
  return k_rpow(base, eval_node<T>(*n.args[1], ctx));
}

double eval_constant(const ExprNode& n) {
  Point empty;
  return eval_node<double>(n, DoubleCtx{&empty, 0});
}

// ---- printing --------------------------------------------------------------
// Precedence levels: 1 additive, 2 multiplicative, 3 unary minus, 4 power, 5 atom.

int level(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
  }
}

void print_node(const ExprNode& n, Dims dims, int min_level, std::string& out) {
  const bool paren = level(n) < min_level;
  if (paren) out += '(';
  switch (n.kind) {
    case NodeKind::Number: {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.number);
      out.append(buf, ptr);
      break;
    }
    case NodeKind::Constant: out += n.name; break;
    case NodeKind::Variable:
      out += n.var < dims.m ? "x" + std::to_string(n.var + 1)
                            : "y" + std::to_string(n.var - dims.m + 1);
      break;
    case NodeKind::Neg:
      out += '-';
      print_node(*n.args[0], dims, 3, out);
      break;
    case NodeKind::Add:
    case NodeKind::Sub:
      print_node(*n.args[0], dims, 1, out);
      out += n.kind == NodeKind::Add ? " + " : " - ";
      print_node(*n.args[1], dims, 2, out);
      break;
    case NodeKind::Mul:
    case NodeKind::Div:
      print_node(*n.args[0], dims, 2, out);
      out += n.kind == NodeKind::Mul ? "*" : "/";
      print_node(*n.args[1], dims, 3, out);
      break;
    case NodeKind::Pow:
      print_node(*n.args[0], dims, 5, out);
      out += '^';
      print_node(*n.args[1], dims, 3, out);
      break;
    case NodeKind::Call:
      out += func_name(n.func);
      out += '(';
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(*n.args[i], dims, 1, out);
      }
      out += ')';
      break;
  }
  if (paren) out += ')';
}

bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case NodeKind::Number:
      if (a.number != b.number) return false;
      break;
    case NodeKind::Variable:
      if (a.var != b.var) return false;
      break;
    case NodeKind::Constant:
      if (a.name != b.name) return false;
      break;
    case NodeKind::Call:
      if (a.func != b.func) return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal_nodes(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace

Expr::Expr(std::shared_ptr<const ExprNode> root, Dims dims)
    : root_(std::move(root)), dims_(dims), deps_(collect_deps(*root_)) {}

Expr parse(std::string_view source, Dims dims) {
  Parser p(source, dims);
  return Expr(p.parse_all(), dims);
}

std::string print(const Expr& e) {
  std::string out;
  print_node(e.root(), e.dims(), 1, out);
  return out;
}

bool structurally_equal(const Expr& a, const Expr& b) {
  return a.dims() == b.dims() && equal_nodes(a.root(), b.root());
}

double evaluate(const Expr& e, const Point& p) {
  check_point(e.dims(), p);
  return eval_node<double>(e.root(), DoubleCtx{&p, e.dims().m});
}

Jet evaluate_jet(const Expr& e, const Point& p, int order) {
  check_point(e.dims(), p);
  return eval_node<Jet>(e.root(), JetCtx{&p, e.dims(), order});
}

ScalarField to_field(const Expr& e) {
  if (e.root().kind == NodeKind::Number && e.dependence() == 0)
    return ScalarField::constant(e.dims(), e.root().number);
  return ScalarField(e.dims(), e.dependence(),
                     [e](const Point& p, int order) { return evaluate_jet(e, p, order); });
}

ScalarField parse_field(std::string_view source, Dims dims) { return to_field(parse(source, dims)); }

}  // namespace algcalc
