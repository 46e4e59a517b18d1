#include <doctest.h>

#include <random>

#include "msvi/tableau.hpp"

using namespace msvi;

namespace {
Tableau one_stage(double a) { return Tableau{{a}, {1.0}, Matrix{{a}}}; }

Tableau random_tableau(std::mt19937_64& rng, int s) {
  std::uniform_real_distribution<double> u(-1, 1), w(0.05, 1.0);
  Tableau t;
  t.c.assign(std::size_t(s), 0.0);
  double sum = 0.0;
  for (int i = 0; i < s; ++i) {
    t.b.push_back(w(rng) * (u(rng) < -0.6 ? -1.0 : 1.0));
    sum += t.b.back();
  }
  // rescale so the weights sum to one without any falling below 0.05 in size
  if (std::abs(sum) < 0.2) t.b[0] += 0.5, sum += 0.5;
  for (double& b : t.b) b /= sum;
  t.a = Matrix(std::size_t(s), std::size_t(s));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) t.a(i, j) = u(rng);
  return t;
}
}  // namespace

TEST_CASE("symplectic pair closed form") {
  CHECK(symplectic_pair(one_stage(1.0)) == Matrix{{0.0}});
  CHECK(symplectic_pair(one_stage(0.5)) == Matrix{{0.5}});
  CHECK(symplectic_pair(one_stage(0.0)) == Matrix{{1.0}});
  CHECK(symplectic_pair(gauss1()) == gauss1().a);

  const Tableau two{{0, 1}, {0.25, 0.75}, Matrix{{0.1, 0.2}, {0.3, 0.4}}};
  const Matrix p = symplectic_pair(two);
  CHECK(p(0, 1) == doctest::Approx((0.75 * 0.25 - 0.75 * 0.3) / 0.25));
  CHECK(p(1, 0) == doctest::Approx((0.25 * 0.75 - 0.25 * 0.2) / 0.75));
}

TEST_CASE("zero weights are rejected") {
  const Tableau bad{{0, 1}, {0.0, 1.0}, Matrix{{0, 0}, {0, 0}}};
  CHECK_THROWS_AS(symplectic_pair(bad), ZeroWeight);
  CHECK_THROWS_AS(bad.validate(), ZeroWeight);
  CHECK_THROWS_AS((Tableau{{0}, {0.9}, Matrix{{0}}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((Tableau{{0, 0}, {1}, Matrix{{0}}}.validate()), InvalidArgument);
}

TEST_CASE("involution") {
  CHECK(involution_check(one_stage(1.0)));
  CHECK(involution_check(gauss1()));
  Tableau three{{0, 0.5, 1}, {0.2, 0.5, 0.3}, Matrix{{0.1, -0.4, 0.3}, {0.7, 0.2, -0.1}, {0.05, 0.6, 0.9}}};
  CHECK(involution_check(three));

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tableau t = random_tableau(rng, 1 + trial % 4);
    Tableau once = t;
    once.a = symplectic_pair(t);
    const Matrix twice = symplectic_pair(once);
    for (std::size_t i = 0; i < twice.rows(); ++i)
      for (std::size_t j = 0; j < twice.cols(); ++j)
        CHECK(std::abs(twice(i, j) - t.a(i, j)) <= 1e-13 * std::max(1.0, std::abs(t.a(i, j))));
  }
}

TEST_CASE("well-definedness condition") {
  const std::vector<double> one{1.0};
  CHECK(check_well_defined(gauss1(), Matrix{{0.5}}, one));
  CHECK_FALSE(check_well_defined(one_stage(1.0), Matrix{{0.5}}, one));
  // a' is the forward-face expansion matrix; the zero conjugate of a = 1
  // corresponds to a' = b - a2 = 1.
  CHECK_FALSE(check_well_defined(one_stage(1.0), Matrix{{0.0}}, one));
  const Tableau euler = one_stage(1.0);
  CHECK(check_well_defined(euler, momentum_expansion_from_conjugate(euler, Matrix{{0.0}}), one));

  CHECK_THROWS_AS(check_well_defined(one_stage(0.0), Matrix{{0.0}}, one), SingularTableau);
}

TEST_CASE("well-definedness holds for the closed-form a'") {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Tableau t = random_tableau(rng, 1 + trial % 4);
    if (!is_invertible(t.a)) continue;
    const std::size_t s = t.b.size();
    Matrix ap(s, s);
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t k = 0; k < s; ++k) ap(j, k) = t.b[k] * t.a(k, j) / t.b[j];
    CHECK(check_well_defined(t, ap, t.b));
    // and the symplectic conjugate maps to the same a'
    const Matrix via_pair = momentum_expansion_from_conjugate(t, symplectic_pair(t));
    for (std::size_t j = 0; j < s; ++j)
      for (std::size_t k = 0; k < s; ++k) CHECK(via_pair(j, k) == doctest::Approx(ap(j, k)).epsilon(1e-12));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("invertibility test") {
  CHECK(is_invertible(Matrix{{0.5}}));
  CHECK_FALSE(is_invertible(Matrix{{0.0}}));
  CHECK_FALSE(is_invertible(Matrix{{1, 2}, {2, 4}}));
  CHECK(is_invertible(Matrix{{0, 1}, {1, 0}}));
  CHECK_FALSE(is_invertible(Matrix{{1, 1}, {1, 1 + 1e-14}}));
}

TEST_CASE("builders") {
  const Tableau g = gauss1();
  CHECK(g.c == std::vector<double>{0.5});
  CHECK(g.b == std::vector<double>{1.0});
  CHECK(g.a == Matrix{{0.5}});
  const EulerPair e = euler_pair();
  CHECK(e.tableau.a == Matrix{{1.0}});
  CHECK(e.tableau.c == std::vector<double>{1.0});
  CHECK(e.conjugate == Matrix{{0.0}});
  CHECK(symplectic_pair(e.tableau) == e.conjugate);
}

TEST_CASE("scheme construction") {
  const PrkScheme p = PrkScheme::from_tableaus(gauss1(), gauss1());
  CHECK(p.time_conjugate == Matrix{{0.5}});
  CHECK(p.b_prime == p.time.b);
  CHECK(p.b_tilde_prime == p.space.b);
  CHECK_NOTHROW(p.require_invertible());

  const PrkScheme ex = build_explicit_pair(one_stage(1.0));
  CHECK(ex.time.a == Matrix{{0.0}});
  CHECK(ex.time_conjugate == Matrix{{1.0}});
  CHECK_THROWS_AS(ex.require_invertible(), SingularTableau);

  const PrkScheme mse = build_explicit_pair(Tableau{{0.0}, {1.0}, Matrix{{0.0}}});
  CHECK(mse.time.a == Matrix{{1.0}});
  CHECK(mse.time.c == std::vector<double>{1.0});
  CHECK(mse.time_conjugate == Matrix{{0.0}});
  CHECK(mse.space.a == Matrix{{1.0}});

  const PrkScheme mid = build_explicit_pair(gauss1());
  CHECK(mid.time.a == Matrix{{0.5}});
  CHECK(mid.space_conjugate == Matrix{{0.5}});

  CHECK_THROWS_AS(build_explicit_pair(Tableau{{0.0}, {0.0}, Matrix{{0.0}}}), ZeroWeight);
}
