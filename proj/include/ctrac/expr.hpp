#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ctrac/errors.hpp"

namespace ctrac {

// Closed-form scalar field on a coordinate box. Immutable expression tree over
// coordinates x1..xd, real constants, +, -, *, /, integer powers and
// sqrt/exp/log/sin/cos/sinh/cosh. Differentiation is exact and closed (the
// derivative of a ScalarExpr is again a ScalarExpr). Simplification is
// best-effort constant folding and 0/1 identities; nothing downstream depends
// on it.
class ScalarExpr {
 public:
  enum class Op : unsigned char {
    Const, Var, Add, Sub, Mul, Div, Neg, Pow, Sqrt, Exp, Log, Sin, Cos, Sinh, Cosh
  };

  struct Node {
    Op op;
    double value = 0.0;  // Const
    int index = 0;       // Var axis, or Pow exponent
    std::shared_ptr<const Node> a, b;
  };

  ScalarExpr() : ScalarExpr(0.0) {}
  /*implicit*/ ScalarExpr(double c);
  static ScalarExpr constant(double c) { return ScalarExpr(c); }
  static ScalarExpr var(int axis);

  double eval(std::span<const double> x) const;  // throws Error(DomainError)
  ScalarExpr derivative(int axis) const;

  // Same expression with every variable index shifted by `offset`
  // (embedding factor-chart fields into product charts).
  ScalarExpr shifted_vars(int offset) const;

  bool is_constant() const { return node_->op == Op::Const; }
  bool is_zero() const { return node_->op == Op::Const && node_->value == 0.0; }
  double constant_value() const { return node_->value; }
  int max_var() const;  // largest variable index used, -1 if none

  std::string str() const;

  friend ScalarExpr operator+(const ScalarExpr&, const ScalarExpr&);
  friend ScalarExpr operator-(const ScalarExpr&, const ScalarExpr&);
  friend ScalarExpr operator*(const ScalarExpr&, const ScalarExpr&);
  friend ScalarExpr operator/(const ScalarExpr&, const ScalarExpr&);
  friend ScalarExpr operator-(const ScalarExpr&);
  friend ScalarExpr pow(const ScalarExpr&, int n);
  friend ScalarExpr sqrt(const ScalarExpr&);
  friend ScalarExpr exp(const ScalarExpr&);
  friend ScalarExpr log(const ScalarExpr&);
  friend ScalarExpr sin(const ScalarExpr&);
  friend ScalarExpr cos(const ScalarExpr&);
  friend ScalarExpr sinh(const ScalarExpr&);
  friend ScalarExpr cosh(const ScalarExpr&);

 private:
  explicit ScalarExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static ScalarExpr make(Op op, ScalarExpr a, ScalarExpr b, int index = 0);
  std::shared_ptr<const Node> node_;
};

// Parses "4/(1+x1^2+x2^2)^2" style strings. Variables are x1..x<dim>; "t" is
// accepted as an alias for x1 when dim == 1 (curve parameters), and "pi" is a
// constant. Throws Error(ParseError).
ScalarExpr parse_expr(const std::string& text, int dim);

}  // namespace ctrac
