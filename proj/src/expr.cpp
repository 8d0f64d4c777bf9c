#include "ctrac/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace ctrac {

using Op = ScalarExpr::Op;

ScalarExpr::ScalarExpr(double c) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = c;
  node_ = std::move(n);
}

ScalarExpr ScalarExpr::var(int axis) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->index = axis;
  return ScalarExpr(std::move(n));
}

ScalarExpr ScalarExpr::make(Op op, ScalarExpr a, ScalarExpr b, int index) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->index = index;
  n->a = a.node_;
  n->b = b.node_;
  return ScalarExpr(std::move(n));
}

namespace {

bool is_const(const ScalarExpr& e, double v) { return e.is_constant() && e.constant_value() == v; }

double checked(double v) {
  if (!std::isfinite(v)) fail(ErrorKind::DomainError, "non-finite value in evaluation");
  return v;
}

}  // namespace

ScalarExpr operator+(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.is_constant() && b.is_constant()) return ScalarExpr(a.constant_value() + b.constant_value());
  return ScalarExpr::make(Op::Add, a, b);
}

ScalarExpr operator-(const ScalarExpr& a, const ScalarExpr& b) {
  if (b.is_zero()) return a;
  if (a.is_constant() && b.is_constant()) return ScalarExpr(a.constant_value() - b.constant_value());
  if (a.is_zero()) return -b;
  return ScalarExpr::make(Op::Sub, a, b);
}

ScalarExpr operator*(const ScalarExpr& a, const ScalarExpr& b) {
  if (a.is_zero() || b.is_zero()) return ScalarExpr(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a.is_constant() && b.is_constant()) return ScalarExpr(a.constant_value() * b.constant_value());
  return ScalarExpr::make(Op::Mul, a, b);
}

ScalarExpr operator/(const ScalarExpr& a, const ScalarExpr& b) {
  if (is_const(b, 1.0)) return a;
  if (a.is_constant() && b.is_constant() && b.constant_value() != 0.0)
    return ScalarExpr(a.constant_value() / b.constant_value());
  // 0/x is not folded: evaluation must still report division by zero at x = 0.
  return ScalarExpr::make(Op::Div, a, b);
}

ScalarExpr operator-(const ScalarExpr& a) {
  if (a.is_constant()) return ScalarExpr(-a.constant_value());
  return ScalarExpr::make(Op::Neg, a, ScalarExpr(0.0));
}

ScalarExpr pow(const ScalarExpr& a, int n) {
  if (n == 0) return ScalarExpr(1.0);
  if (n == 1) return a;
  if (a.is_constant()) return ScalarExpr(std::pow(a.constant_value(), n));
  return ScalarExpr::make(Op::Pow, a, ScalarExpr(0.0), n);
}

#define CTRAC_UNARY(fn, OPK, cfn)                                             \
  ScalarExpr fn(const ScalarExpr& a) {                                        \
    if (a.is_constant()) return ScalarExpr(checked(cfn(a.constant_value()))); \
    return ScalarExpr::make(Op::OPK, a, ScalarExpr(0.0));                     \
  }

CTRAC_UNARY(sqrt, Sqrt, std::sqrt)
CTRAC_UNARY(exp, Exp, std::exp)
CTRAC_UNARY(log, Log, std::log)
CTRAC_UNARY(sin, Sin, std::sin)
CTRAC_UNARY(cos, Cos, std::cos)
CTRAC_UNARY(sinh, Sinh, std::sinh)
CTRAC_UNARY(cosh, Cosh, std::cosh)
#undef CTRAC_UNARY

namespace {

double eval_node(const ScalarExpr::Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var:
      if (n.index < 0 || n.index >= static_cast<int>(x.size()))
        fail(ErrorKind::DomainError, "variable index out of range");
      return x[n.index];
    case Op::Add: return checked(eval_node(*n.a, x) + eval_node(*n.b, x));
    case Op::Sub: return checked(eval_node(*n.a, x) - eval_node(*n.b, x));
    case Op::Mul: return checked(eval_node(*n.a, x) * eval_node(*n.b, x));
    case Op::Div: {
      double den = eval_node(*n.b, x);
      if (den == 0.0) fail(ErrorKind::DomainError, "division by zero");
      return checked(eval_node(*n.a, x) / den);
    }
    case Op::Neg: return -eval_node(*n.a, x);
    case Op::Pow: {
      double base = eval_node(*n.a, x);
      if (base == 0.0 && n.index < 0) fail(ErrorKind::DomainError, "zero to negative power");
      return checked(std::pow(base, n.index));
    }
    case Op::Sqrt: {
      double v = eval_node(*n.a, x);
      if (v < 0.0) fail(ErrorKind::DomainError, "sqrt of negative");
      return std::sqrt(v);
    }
    case Op::Exp: return checked(std::exp(eval_node(*n.a, x)));
    case Op::Log: {
      double v = eval_node(*n.a, x);
      if (v <= 0.0) fail(ErrorKind::DomainError, "log of non-positive");
      return std::log(v);
    }
    case Op::Sin: return std::sin(eval_node(*n.a, x));
    case Op::Cos: return std::cos(eval_node(*n.a, x));
    case Op::Sinh: return checked(std::sinh(eval_node(*n.a, x)));
    case Op::Cosh: return checked(std::cosh(eval_node(*n.a, x)));
  }
  fail(ErrorKind::DomainError, "corrupt expression node");
}

}  // namespace

double ScalarExpr::eval(std::span<const double> x) const { return eval_node(*node_, x); }

ScalarExpr ScalarExpr::derivative(int axis) const {
  const Node& n = *node_;
  ScalarExpr a = n.a ? ScalarExpr(n.a) : ScalarExpr(0.0);
  ScalarExpr b = n.b ? ScalarExpr(n.b) : ScalarExpr(0.0);
  switch (n.op) {
    case Op::Const: return ScalarExpr(0.0);
    case Op::Var: return ScalarExpr(n.index == axis ? 1.0 : 0.0);
    case Op::Add: return a.derivative(axis) + b.derivative(axis);
    case Op::Sub: return a.derivative(axis) - b.derivative(axis);
    case Op::Mul: return a.derivative(axis) * b + a * b.derivative(axis);
    case Op::Div: return (a.derivative(axis) * b - a * b.derivative(axis)) / (b * b);
    case Op::Neg: return -a.derivative(axis);
    case Op::Pow: return ScalarExpr(double(n.index)) * pow(a, n.index - 1) * a.derivative(axis);
    case Op::Sqrt: return a.derivative(axis) / (ScalarExpr(2.0) * sqrt(a));
    case Op::Exp: return exp(a) * a.derivative(axis);
    case Op::Log: return a.derivative(axis) / a;
    case Op::Sin: return cos(a) * a.derivative(axis);
    case Op::Cos: return -(sin(a) * a.derivative(axis));
    case Op::Sinh: return cosh(a) * a.derivative(axis);
    case Op::Cosh: return sinh(a) * a.derivative(axis);
  }
  fail(ErrorKind::DomainError, "corrupt expression node");
}

ScalarExpr ScalarExpr::shifted_vars(int offset) const {
  const Node& n = *node_;
  switch (n.op) {
    case Op::Const: return *this;
    case Op::Var: return var(n.index + offset);
    default: {
      auto m = std::make_shared<Node>(n);
      if (n.a) m->a = ScalarExpr(n.a).shifted_vars(offset).node_;
      if (n.b) m->b = ScalarExpr(n.b).shifted_vars(offset).node_;
      return ScalarExpr(std::move(m));
    }
  }
}

int ScalarExpr::max_var() const {
  const Node& n = *node_;
  if (n.op == Op::Var) return n.index;
  int m = -1;
  if (n.a) m = std::max(m, ScalarExpr(n.a).max_var());
  if (n.b) m = std::max(m, ScalarExpr(n.b).max_var());
  return m;
}

namespace {

void print_node(const ScalarExpr::Node& n, std::ostream& os) {
  auto paren = [&os](const ScalarExpr::Node& c) {
    os << '(';
    print_node(c, os);
    os << ')';
  };
  switch (n.op) {
    case Op::Const: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.value;
      std::string s = tmp.str();
      if (n.value < 0) os << '(' << s << ')';
      else os << s;
      return;
    }
    case Op::Var: os << 'x' << (n.index + 1); return;
    case Op::Add: paren(*n.a); os << '+'; paren(*n.b); return;
    case Op::Sub: paren(*n.a); os << '-'; paren(*n.b); return;
    case Op::Mul: paren(*n.a); os << '*'; paren(*n.b); return;
    case Op::Div: paren(*n.a); os << '/'; paren(*n.b); return;
    case Op::Neg: os << "(0-"; print_node(*n.a, os); os << ')'; return;
    case Op::Pow: paren(*n.a); os << '^'; if (n.index < 0) { os << '(' << n.index << ')'; } else os << n.index; return;
    case Op::Sqrt: os << "sqrt"; paren(*n.a); return;
    case Op::Exp: os << "exp"; paren(*n.a); return;
    case Op::Log: os << "log"; paren(*n.a); return;
    case Op::Sin: os << "sin"; paren(*n.a); return;
    case Op::Cos: os << "cos"; paren(*n.a); return;
    case Op::Sinh: os << "sinh"; paren(*n.a); return;
    case Op::Cosh: os << "cosh"; paren(*n.a); return;
  }
}

}  // namespace

std::string ScalarExpr::str() const {
  std::ostringstream os;
  print_node(*node_, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// Parser: expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)* ;
// unary := '-'* power ; power := atom ('^' int)? ; atom := number | name |
// name '(' expr ')' | '(' expr ')'.

namespace {

struct Parser {
  const std::string& s;
  size_t i = 0;
  int dim;

  char peek() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i < s.size() ? s[i] : '\0';
  }
  bool accept(char c) {
    if (peek() == c) { ++i; return true; }
    return false;
  }
  [[noreturn]] void err(const std::string& msg) {
    fail(ErrorKind::ParseError, msg + " at position " + std::to_string(i) + " in \"" + s + "\"");
  }

  ScalarExpr parse_expr() {
    ScalarExpr e = parse_term();
    while (true) {
      if (accept('+')) e = e + parse_term();
      else if (accept('-')) e = e - parse_term();
      else return e;
    }
  }

  ScalarExpr parse_term() {
    ScalarExpr e = parse_unary();
    while (true) {
      if (accept('*')) e = e * parse_unary();
      else if (accept('/')) e = e / parse_unary();
      else return e;
    }
  }

  ScalarExpr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  ScalarExpr parse_power() {
    ScalarExpr base = parse_atom();
    if (accept('^')) {
      bool neg = false, paren = accept('(');
      if (paren && accept('-')) neg = true;
      else if (!paren && accept('-')) neg = true;
      char c = peek();
      if (!std::isdigit(static_cast<unsigned char>(c))) err("expected integer exponent");
      long n = 0;
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) n = n * 10 + (s[i++] - '0');
      if (paren && !accept(')')) err("expected ')' after exponent");
      return pow(base, static_cast<int>(neg ? -n : n));
    }
    return base;
  }

  ScalarExpr parse_atom() {
    char c = peek();
    if (c == '(') {
      ++i;
      ScalarExpr e = parse_expr();
      if (!accept(')')) err("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_name();
    err("unexpected character");
  }

  ScalarExpr parse_number() {
    size_t start = i;
    while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
      size_t j = i + 1;
      if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
      if (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
        i = j;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
    }
    try {
      return ScalarExpr(std::stod(s.substr(start, i - start)));
    } catch (const std::exception&) {
      err("bad number");
    }
  }

  ScalarExpr parse_name() {
    size_t start = i;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
    std::string name = s.substr(start, i - start);
    if (name == "pi") return ScalarExpr(3.14159265358979323846);
    if (name == "t" && dim == 1) return ScalarExpr::var(0);
    if (name.size() >= 2 && name[0] == 'x') {
      bool digits = true;
      for (size_t k = 1; k < name.size(); ++k)
        if (!std::isdigit(static_cast<unsigned char>(name[k]))) digits = false;
      if (digits) {
        int axis = std::stoi(name.substr(1)) - 1;
        if (axis < 0 || axis >= dim) err("variable " + name + " out of range for dimension " + std::to_string(dim));
        return ScalarExpr::var(axis);
      }
    }
    static const char* fns[] = {"sqrt", "exp", "log", "sin", "cos", "sinh", "cosh"};
    for (const char* fn : fns) {
      if (name == fn) {
        if (!accept('(')) err("expected '(' after " + name);
        ScalarExpr arg = parse_expr();
        if (!accept(')')) err("expected ')'");
        if (name == "sqrt") return sqrt(arg);
        if (name == "exp") return exp(arg);
        if (name == "log") return log(arg);
        if (name == "sin") return sin(arg);
        if (name == "cos") return cos(arg);
        if (name == "sinh") return sinh(arg);
        return cosh(arg);
      }
    }
    err("unknown name '" + name + "'");
  }
};

}  // namespace

ScalarExpr parse_expr(const std::string& text, int dim) {
  Parser p{text, 0, dim};
  ScalarExpr e = p.parse_expr();
  if (p.peek() != '\0') p.err("trailing input");
  return e;
}

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::BadChart: return "BadChart";
    case ErrorKind::ScaleMismatch: return "ScaleMismatch";
    case ErrorKind::MissingMu: return "MissingMu";
    case ErrorKind::NotEinstein: return "NotEinstein";
    case ErrorKind::UnsupportedValence: return "UnsupportedValence";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::NotAlmostEinstein: return "NotAlmostEinstein";
    case ErrorKind::NotParallel: return "NotParallel";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::RankUnstable: return "RankUnstable";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::LinearlyDependent: return "LinearlyDependent";
    case ErrorKind::NotConformalKilling: return "NotConformalKilling";
    case ErrorKind::NotAZero: return "NotAZero";
    case ErrorKind::NotEinsteinFactor: return "NotEinsteinFactor";
    case ErrorKind::ScalarMismatch: return "ScalarMismatch";
    case ErrorKind::BadInterval: return "BadInterval";
    case ErrorKind::UnknownFixture: return "UnknownFixture";
    case ErrorKind::SingularLevelSet: return "SingularLevelSet";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace ctrac
