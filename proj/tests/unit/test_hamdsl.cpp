#include <doctest.h>

#include <cmath>
#include <random>

#include "msvi/hamdsl.hpp"

using namespace msvi;
using namespace msvi::dsl;

namespace {
constexpr const char* kSineGordon = "0.5*p0^2 - 0.5*p1^2 - cos(phi)";

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

// Expressions that exercise every node kind; arguments stay inside domains
// for points in [-3, 3]^3.
const char* const kSamples[] = {
    kSineGordon,
    "p0*p1",
    "sin(phi)*cosh(p0) - exp(0.3*p1)/(2 + phi^2)",
    "sqrt(1 + phi^2 + p0^4) - arctan(p1*phi)",
    "-(phi - p0)^3 + sinh(p1/3)*p0^-2 - 4",
    "((phi))*2.5e-1 - -p1",
};
}  // namespace

TEST_CASE("parse the sine-Gordon Hamiltonian") {
  const Expr e = parse(kSineGordon);
  CHECK(e.kind() == Expr::Kind::sub);
  const double pt[] = {0.0, 1.0, 2.0};
  CHECK(evaluate(e, pt) == doctest::Approx(-2.5).epsilon(1e-15));
}

TEST_CASE("parse errors") {
  try {
    parse("cos(phi");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& err) {
    CHECK(err.offset() == 7);
    CHECK(std::string(err.what()).find("')'") != std::string::npos);
  }
  try {
    parse("phi + q0");
    FAIL("expected an unknown identifier");
  } catch (const UnknownIdentifier& err) {
    CHECK(err.name() == "q0");
    CHECK(err.offset() == 6);
  }
  CHECK_THROWS_AS(parse("phi^0.5"), SyntaxError);
  CHECK_THROWS_AS(parse("phi +"), SyntaxError);
  CHECK_THROWS_AS(parse("phi p0"), SyntaxError);
  CHECK_THROWS_AS(parse("tan(phi)"), UnknownIdentifier);
}

TEST_CASE("precedence and associativity") {
  const double pt[] = {2.0, 3.0, 5.0};
  CHECK(evaluate(parse("-phi^2"), pt) == -4.0);
  CHECK(evaluate(parse("phi - p0 - p1"), pt) == -6.0);
  CHECK(evaluate(parse("p1 / phi / 5"), pt) == 0.5);
  CHECK(evaluate(parse("phi * p0 ^ 2"), pt) == 18.0);
  CHECK(evaluate(parse(" ( phi+p0 )*p1 "), pt) == 25.0);
  CHECK(evaluate(parse("phi^-1"), pt) == 0.5);
}

TEST_CASE("symbolic partials of the sine-Gordon pieces") {
  CHECK(print(differentiate(parse("-cos(phi)"), "phi")) == "sin(phi)");
  CHECK(print(differentiate(parse("0.5*p0^2"), "p0")) == "p0");
  CHECK(print(differentiate(parse("-0.5*p1^2"), "p1")) == "-p1");
  CHECK(print(differentiate(parse("phi^1 + 0*p0"), "p0")) == "0");
  CHECK_THROWS_AS(differentiate(parse("phi"), "x"), UnknownIdentifier);
}

TEST_CASE("compiled sine-Gordon model") {
  const HamiltonianPtr h = compile(parse(kSineGordon));
  const FibrePoint z{0.0, 1.0, 2.0};
  CHECK(h->value(z) == doctest::Approx(-2.5).epsilon(1e-15));
  const Vec3 g = h->gradient(z);
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 1.0);
  CHECK(g[2] == -2.0);
  CHECK(h->has_hessian());
}

TEST_CASE("bilinear hessian") {
  const HamiltonianPtr h = compile(parse("p0*p1"));
  const Mat3 hs = h->hessian({0, 0, 0});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(hs[i][j] == ((i == 1 && j == 2) || (i == 2 && j == 1) ? 1.0 : 0.0));
}

TEST_CASE("evaluation domain errors carry the point") {
  const HamiltonianPtr h = compile(parse("sqrt(phi)"));
  try {
    h->value({-1.0, 0.0, 0.0});
    FAIL("expected an evaluation error");
  } catch (const EvaluationError& err) {
    REQUIRE(err.point().size() == 3);
    CHECK(err.point()[0] == -1.0);
  }
  const double zero[] = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(evaluate(parse("1/phi"), zero), EvaluationError);
  CHECK_THROWS_AS(evaluate(parse("phi^-2"), zero), EvaluationError);
}

TEST_CASE("gradient and hessian match central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3, 3);
  const double step = 1e-5;
  for (const char* src : kSamples) {
    CAPTURE(src);
    const HamiltonianPtr h = compile(parse(src));
    for (int trial = 0; trial < 100; ++trial) {
      const std::array<double, 3> base{u(rng), u(rng), u(rng)};
      if (std::string(src).find("p0^-2") != std::string::npos && std::abs(base[1]) < 0.3) continue;
      auto at = [&](int c, double d) {
        auto p = base;
        p[c] += d;
        return FibrePoint{p[0], p[1], p[2]};
      };
      const FibrePoint z{base[0], base[1], base[2]};
      const Vec3 g = h->gradient(z);
      const Mat3 hs = h->hessian(z);
      for (int c = 0; c < 3; ++c) {
        const double fd = (h->value(at(c, step)) - h->value(at(c, -step))) / (2 * step);
        CHECK(rel_err(g[c], fd) <= 1e-6);
        const Vec3 gp = h->gradient(at(c, step)), gm = h->gradient(at(c, -step));
        for (int r = 0; r < 3; ++r) CHECK(rel_err(hs[r][c], (gp[r] - gm[r]) / (2 * step)) <= 1e-5);
      }
    }
  }
}

TEST_CASE("mixed partials commute") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const char* src : kSamples) {
    const Expr e = parse(src);
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const Expr dij = differentiate(differentiate(e, i), j);
        const Expr dji = differentiate(differentiate(e, j), i);
        for (int trial = 0; trial < 100; ++trial) {
          const double pt[] = {u(rng), 0.5 + std::abs(u(rng)), u(rng)};
          const double a = evaluate(dij, pt), b = evaluate(dji, pt);
          CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)) * 4);
        }
      }
  }
}

TEST_CASE("print then parse round-trips") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (const char* src : kSamples) {
    const Expr e = parse(src);
    std::vector<Expr> family{e, differentiate(e, 0), differentiate(e, 1), differentiate(differentiate(e, 2), 0)};
    for (const Expr& f : family) {
      const std::string text = print(f);
      CAPTURE(text);
      const Expr back = parse(text);
      CHECK(print(back) == text);
      for (int trial = 0; trial < 100; ++trial) {
        const double pt[] = {u(rng), 0.5 + std::abs(u(rng)), u(rng)};
        const double a = evaluate(f, pt), b = evaluate(back, pt);
        CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)));
      }
    }
  }
  CHECK(print(parse("(-2)^2")) == "(-2)^2");
  CHECK(print(parse("phi - (p0 - p1)")) == "phi - (p0 - p1)");
  CHECK(print(parse("phi/(p0*p1)")) == "phi / (p0 * p1)");
}

TEST_CASE("scalar functions in a custom variable") {
  const VariableSet xs{{"x"}};
  const ScalarFunction f(parse("4*arctan(exp(x))", xs));
  CHECK(f(0.0) == doctest::Approx(M_PI).epsilon(1e-15));
  const ScalarFunction df = f.derivative();
  CHECK(df(0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(parse("phi", xs), UnknownIdentifier);
}
