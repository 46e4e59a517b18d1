#pragma once

// A small expression language for scalar Hamiltonians H(phi, p0, p1).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)*
//   primary := number | variable | function '(' expr ')' | '(' expr ')'
//
// Functions: sin cos exp cosh sinh sqrt arctan. Exponents are integer
// literals only. The variable set defaults to {phi, p0, p1}; other sets (for
// example {x} for initial profiles or {t} for boundary data) can be passed
// explicitly.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msvi/core.hpp"

namespace msvi::dsl {

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& expected);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::string name, std::size_t offset);
  const std::string& name() const { return name_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

/// Domain violation during evaluation; carries the variable values.
class EvaluationError : public Error {
 public:
  EvaluationError(const std::string& what, std::vector<double> point);
  const std::vector<double>& point() const { return point_; }

 private:
  std::vector<double> point_;
};

enum class Func { sin, cos, exp, cosh, sinh, sqrt, arctan };

struct Node;

/// Immutable expression tree handle. Copies share structure.
class Expr {
 public:
  enum class Kind { number, variable, add, sub, mul, div, pow, neg, call };

  Expr() = default;

  static Expr number(double v);
  static Expr variable(int index, std::string name);
  static Expr binary(Kind k, Expr lhs, Expr rhs);
  static Expr power(Expr base, int exponent);
  static Expr negate(Expr e);
  static Expr call(Func f, Expr arg);

  bool valid() const { return node_ != nullptr; }
  Kind kind() const;
  double number_value() const;
  int variable_index() const;
  const std::string& variable_name() const;
  int exponent() const;
  Func func() const;
  const Expr& lhs() const;  // operand of neg/call/pow, left of binaries
  const Expr& rhs() const;

  bool is_number(double v) const { return valid() && kind() == Kind::number && number_value() == v; }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct VariableSet {
  std::vector<std::string> names;
  int index_of(std::string_view name) const;
};

/// {phi, p0, p1} in that index order.
const VariableSet& hamiltonian_variables();

Expr parse(std::string_view source, const VariableSet& vars = hamiltonian_variables());

/// Exact partial derivative with respect to variable `var`. Identity
/// elements (0*x, x*1, x+0, x^1, x^0) and purely numeric subtrees are
/// folded; nothing more.
Expr differentiate(const Expr& e, int var);
Expr differentiate(const Expr& e, std::string_view var,
                   const VariableSet& vars = hamiltonian_variables());

/// Canonical serializer; parse(print(e)) evaluates identically to e.
std::string print(const Expr& e);

/// Evaluates with vars[k] bound to variable index k.
double evaluate(const Expr& e, std::span<const double> vars);

/// Builds the Hamiltonian model: value, three symbolic partials and the six
/// distinct symbolic second partials.
HamiltonianPtr compile(const Expr& e);

/// f(x) for an expression in a single variable (index 0): initial
/// profiles, boundary data, potentials.
class ScalarFunction {
 public:
  ScalarFunction() = default;
  explicit ScalarFunction(Expr e);
  double operator()(double x) const;
  const Expr& expr() const { return expr_; }
  ScalarFunction derivative() const;

 private:
  Expr expr_;
};

}  // namespace msvi::dsl
