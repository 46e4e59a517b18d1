#include "msvi/hamdsl.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fmt/ranges.h>

namespace msvi::dsl {

SyntaxError::SyntaxError(std::size_t offset, const std::string& expected)
    : Error(fmt::format("syntax error at byte {}: expected {}", offset, expected)), offset_(offset) {}

UnknownIdentifier::UnknownIdentifier(std::string name, std::size_t offset)
    : Error(fmt::format("unknown identifier '{}' at byte {}", name, offset)),
      name_(std::move(name)),
      offset_(offset) {}

EvaluationError::EvaluationError(const std::string& what, std::vector<double> point)
    : Error(fmt::format("evaluation error: {} at point ({})", what, fmt::join(point, ", "))),
      point_(std::move(point)) {}

struct Node {
  Expr::Kind kind;
  double number = 0.0;
  int index = 0;  // variable index or integer exponent
  std::string name;
  Func func = Func::sin;
  Expr a;
  Expr b;
};

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 7> kFunctions{{
    {"sin", Func::sin},
    {"cos", Func::cos},
    {"exp", Func::exp},
    {"cosh", Func::cosh},
    {"sinh", Func::sinh},
    {"sqrt", Func::sqrt},
    {"arctan", Func::arctan},
}};

std::string_view func_name(Func f) {
  for (const auto& [name, fn] : kFunctions)
    if (fn == f) return name;
  return "?";
}

}  // namespace

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->number = v;
  return Expr(std::move(n));
}

Expr Expr::variable(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->index = index;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::binary(Kind k, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::pow;
  n->a = std::move(base);
  n->index = exponent;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr e) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::neg;
  n->a = std::move(e);
  return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->func = f;
  n->a = std::move(arg);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::number_value() const { return node_->number; }
int Expr::variable_index() const { return node_->index; }
const std::string& Expr::variable_name() const { return node_->name; }
int Expr::exponent() const { return node_->index; }
Func Expr::func() const { return node_->func; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

int VariableSet::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

const VariableSet& hamiltonian_variables() {
  static const VariableSet vars{{"phi", "p0", "p1"}};
  return vars;
}

// ---------------------------------------------------------------- parsing

namespace {

class Parser {
 public:
  Parser(std::string_view src, const VariableSet& vars) : src_(src), vars_(vars) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "end of input");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, fmt::format("'{}'", c));
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(Expr::Kind::add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Kind::sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(Expr::Kind::mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Kind::div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) {
      Expr operand = parse_unary();
      if (operand.kind() == Expr::Kind::number) return Expr::number(-operand.number_value());
      return Expr::negate(operand);
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (accept('^')) {
      const bool negative = accept('-');
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const bool fractional = pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E');
      int value = 0;
      auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
      if (start == pos_ || fractional || ec != std::errc() || ptr != src_.data() + pos_)
        throw SyntaxError(start, "integer exponent");
      base = Expr::power(base, negative ? -value : value);
    }
    return base;
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      const std::size_t exp_start = pos_;
      digits();
      if (pos_ == exp_start) pos_ = save;  // "2e" is a number followed by an identifier
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw SyntaxError(start, "number");
    return Expr::number(value);
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "operand");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (int idx = vars_.index_of(name); idx >= 0) return Expr::variable(idx, std::string(name));
      for (const auto& [fname, fn] : kFunctions) {
        if (fname == name) {
          expect('(');
          Expr arg = parse_expr();
          expect(')');
          return Expr::call(fn, arg);
        }
      }
      throw UnknownIdentifier(std::string(name), start);
    }
    throw SyntaxError(pos_, "operand");
  }

  std::string_view src_;
  const VariableSet& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view source, const VariableSet& vars) { return Parser(source, vars).parse_all(); }

// ---------------------------------------------------------------- folding

namespace {

bool is_num(const Expr& e) { return e.kind() == Expr::Kind::number; }

Expr make_neg(const Expr& a) {
  if (is_num(a)) return Expr::number(-a.number_value());
  if (a.kind() == Expr::Kind::neg) return a.lhs();
  return Expr::negate(a);
}

Expr make_add(const Expr& a, const Expr& b) {
  if (a.is_number(0.0)) return b;
  if (b.is_number(0.0)) return a;
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() + b.number_value());
  return Expr::binary(Expr::Kind::add, a, b);
}

Expr make_sub(const Expr& a, const Expr& b) {
  if (b.is_number(0.0)) return a;
  if (a.is_number(0.0)) return make_neg(b);
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() - b.number_value());
  return Expr::binary(Expr::Kind::sub, a, b);
}

Expr make_mul(const Expr& a, const Expr& b) {
  if (a.is_number(0.0) || b.is_number(0.0)) return Expr::number(0.0);
  if (a.is_number(1.0)) return b;
  if (b.is_number(1.0)) return a;
  if (a.is_number(-1.0)) return make_neg(b);
  if (b.is_number(-1.0)) return make_neg(a);
  if (is_num(a) && is_num(b)) return Expr::number(a.number_value() * b.number_value());
  // c1 * (c2 * x) -> (c1 c2) * x, so power-rule coefficients collapse
  if (is_num(a) && b.kind() == Expr::Kind::mul && is_num(b.lhs()))
    return make_mul(Expr::number(a.number_value() * b.lhs().number_value()), b.rhs());
  return Expr::binary(Expr::Kind::mul, a, b);
}

Expr make_div(const Expr& a, const Expr& b) {
  if (a.is_number(0.0) && !b.is_number(0.0)) return Expr::number(0.0);
  if (b.is_number(1.0)) return a;
  if (is_num(a) && is_num(b) && b.number_value() != 0.0)
    return Expr::number(a.number_value() / b.number_value());
  return Expr::binary(Expr::Kind::div, a, b);
}

Expr make_pow(const Expr& base, int n) {
  if (n == 0) return Expr::number(1.0);
  if (n == 1) return base;
  if (is_num(base) && (n > 0 || base.number_value() != 0.0))
    return Expr::number(std::pow(base.number_value(), n));
  return Expr::power(base, n);
}

}  // namespace

Expr differentiate(const Expr& e, int var) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::number:
      return Expr::number(0.0);
    case K::variable:
      return Expr::number(e.variable_index() == var ? 1.0 : 0.0);
    case K::add:
      return make_add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case K::sub:
      return make_sub(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
    case K::mul: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      return make_add(make_mul(differentiate(u, var), v), make_mul(u, differentiate(v, var)));
    }
    case K::div: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      Expr num = make_sub(make_mul(differentiate(u, var), v), make_mul(u, differentiate(v, var)));
      return make_div(num, make_pow(v, 2));
    }
    case K::pow: {
      const int n = e.exponent();
      const Expr& u = e.lhs();
      return make_mul(make_mul(Expr::number(n), make_pow(u, n - 1)), differentiate(u, var));
    }
    case K::neg:
      return make_neg(differentiate(e.lhs(), var));
    case K::call: {
      const Expr& u = e.lhs();
      Expr du = differentiate(u, var);
      if (du.is_number(0.0)) return du;
      switch (e.func()) {
        case Func::sin:
          return make_mul(Expr::call(Func::cos, u), du);
        case Func::cos:
          return make_mul(make_neg(Expr::call(Func::sin, u)), du);
        case Func::exp:
          return make_mul(e, du);
        case Func::cosh:
          return make_mul(Expr::call(Func::sinh, u), du);
        case Func::sinh:
          return make_mul(Expr::call(Func::cosh, u), du);
        case Func::sqrt:
          return make_div(du, make_mul(Expr::number(2.0), e));
        case Func::arctan:
          return make_div(du, make_add(Expr::number(1.0), make_pow(u, 2)));
      }
    }
  }
  throw Error("differentiate: corrupt expression");
}

Expr differentiate(const Expr& e, std::string_view var, const VariableSet& vars) {
  const int idx = vars.index_of(var);
  if (idx < 0) throw UnknownIdentifier(std::string(var), 0);
  return differentiate(e, idx);
}

// ---------------------------------------------------------------- printing

namespace {

int precedence(const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::add:
    case K::sub:
      return 1;
    case K::mul:
    case K::div:
      return 2;
    case K::neg:
      return 3;
    case K::pow:
      return 4;
    case K::number:
      return e.number_value() < 0.0 || std::signbit(e.number_value()) ? 3 : 5;
    default:
      return 5;
  }
}

void print_into(const Expr& e, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_into(e, out);
    out += ')';
  } else {
    print_into(e, out);
  }
}

void print_number(double v, std::string& out) {
  if (!std::isfinite(v)) throw Error("print: non-finite literal cannot be serialized");
  char buf[64];
  const double mag = std::abs(v);
  if (std::signbit(v)) out += '-';
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, mag);
  out.append(buf, ptr);
}

void print_into(const Expr& e, std::string& out) {
  using K = Expr::Kind;
  switch (e.kind()) {
    case K::number:
      print_number(e.number_value(), out);
      return;
    case K::variable:
      out += e.variable_name();
      return;
    case K::add:
    case K::sub:
    case K::mul:
    case K::div: {
      const int p = precedence(e);
      print_child(e.lhs(), p, out);
      const char op = e.kind() == K::add ? '+' : e.kind() == K::sub ? '-' : e.kind() == K::mul ? '*' : '/';
      out += ' ';
      out += op;
      out += ' ';
      print_child(e.rhs(), p + 1, out);
      return;
    }
    case K::neg:
      out += '-';
      print_child(e.lhs(), 3, out);
      return;
    case K::pow:
      print_child(e.lhs(), 4, out);
      out += '^';
      out += std::to_string(e.exponent());
      return;
    case K::call:
      out += func_name(e.func());
      out += '(';
      print_into(e.lhs(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

// ---------------------------------------------------------------- evaluation

namespace {

double eval_node(const Expr& e, std::span<const double> vars) {
  using K = Expr::Kind;
  auto fail = [&](const std::string& what) -> double {
    throw EvaluationError(what, std::vector<double>(vars.begin(), vars.end()));
  };
  switch (e.kind()) {
    case K::number:
      return e.number_value();
    case K::variable: {
      const auto i = static_cast<std::size_t>(e.variable_index());
      if (i >= vars.size()) fail(fmt::format("variable '{}' is unbound", e.variable_name()));
      return vars[i];
    }
    case K::add:
      return eval_node(e.lhs(), vars) + eval_node(e.rhs(), vars);
    case K::sub:
      return eval_node(e.lhs(), vars) - eval_node(e.rhs(), vars);
    case K::mul:
      return eval_node(e.lhs(), vars) * eval_node(e.rhs(), vars);
    case K::div: {
      const double num = eval_node(e.lhs(), vars);
      const double den = eval_node(e.rhs(), vars);
      if (den == 0.0) fail("division by zero");
      return num / den;
    }
    case K::pow: {
      const double base = eval_node(e.lhs(), vars);
      const int n = e.exponent();
      if (n < 0 && base == 0.0) fail("division by zero (negative power of 0)");
      return std::pow(base, n);
    }
    case K::neg:
      return -eval_node(e.lhs(), vars);
    case K::call: {
      const double u = eval_node(e.lhs(), vars);
      switch (e.func()) {
        case Func::sin:
          return std::sin(u);
        case Func::cos:
          return std::cos(u);
        case Func::exp:
          return std::exp(u);
        case Func::cosh:
          return std::cosh(u);
        case Func::sinh:
          return std::sinh(u);
        case Func::sqrt:
          if (u < 0.0) fail("sqrt of negative argument");
          return std::sqrt(u);
        case Func::arctan:
          return std::atan(u);
      }
    }
  }
  throw Error("evaluate: corrupt expression");
}

class CompiledHamiltonian final : public HamiltonianModel {
 public:
  explicit CompiledHamiltonian(const Expr& e) : value_(e) {
    for (int i = 0; i < 3; ++i) grad_[i] = differentiate(e, i);
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) hess_[i][j] = differentiate(grad_[i], j);
  }

  double value(const FibrePoint& z) const override { return eval_node(value_, point(z)); }

  Vec3 gradient(const FibrePoint& z) const override {
    const auto p = point(z);
    return {eval_node(grad_[0], p), eval_node(grad_[1], p), eval_node(grad_[2], p)};
  }

  bool has_hessian() const override { return true; }

  Mat3 hessian(const FibrePoint& z) const override {
    const auto p = point(z);
    Mat3 h{};
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) h[i][j] = h[j][i] = eval_node(hess_[i][j], p);
    return h;
  }

 private:
  static std::array<double, 3> point(const FibrePoint& z) { return {z.phi, z.p0, z.p1}; }

  Expr value_;
  std::array<Expr, 3> grad_;
  std::array<std::array<Expr, 3>, 3> hess_;
};

}  // namespace

double evaluate(const Expr& e, std::span<const double> vars) {
  if (!e.valid()) throw InvalidArgument("evaluate: empty expression");
  return eval_node(e, vars);
}

HamiltonianPtr compile(const Expr& e) {
  if (!e.valid()) throw InvalidArgument("compile: empty expression");
  return std::make_shared<CompiledHamiltonian>(e);
}

ScalarFunction::ScalarFunction(Expr e) : expr_(std::move(e)) {
  if (!expr_.valid()) throw InvalidArgument("ScalarFunction: empty expression");
}

double ScalarFunction::operator()(double x) const {
  const double v[1] = {x};
  return eval_node(expr_, v);
}

ScalarFunction ScalarFunction::derivative() const { return ScalarFunction(differentiate(expr_, 0)); }

}  // namespace msvi::dsl
