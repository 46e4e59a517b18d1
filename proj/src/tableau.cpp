#include "msvi/tableau.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace msvi {

void Tableau::validate() const {
  const std::size_t s = b.size();
  if (s == 0) throw InvalidArgument("tableau: at least one stage is required");
  if (c.size() != s) throw InvalidArgument(fmt::format("tableau: c has {} entries, b has {}", c.size(), s));
  if (a.rows() != s || a.cols() != s)
    throw InvalidArgument(fmt::format("tableau: a is {}x{}, expected {}x{}", a.rows(), a.cols(), s, s));
  for (std::size_t i = 0; i < s; ++i)
    if (b[i] == 0.0) throw ZeroWeight(fmt::format("tableau: weight b[{}] = 0; every weight must be nonzero", i));
  const double sum = std::accumulate(b.begin(), b.end(), 0.0);
  if (std::abs(sum - 1.0) > 1e-14)
    throw InvalidArgument(fmt::format("tableau: weights sum to {}, expected 1", sum));
}

Matrix symplectic_pair(const Tableau& t) {
  const std::size_t s = t.b.size();
  for (std::size_t i = 0; i < s; ++i)
    if (t.b[i] == 0.0) throw ZeroWeight(fmt::format("symplectic_pair: weight b[{}] = 0", i));
  if (t.a.rows() != s || t.a.cols() != s) throw InvalidArgument("symplectic_pair: a/b size mismatch");
  Matrix out(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) out(i, j) = (t.b[j] * t.b[i] - t.b[j] * t.a(j, i)) / t.b[i];
  return out;
}

bool involution_check(const Tableau& t) {
  Tableau once = t;
  once.a = symplectic_pair(t);
  const Matrix twice = symplectic_pair(once);
  for (std::size_t i = 0; i < twice.rows(); ++i)
    for (std::size_t j = 0; j < twice.cols(); ++j)
      if (std::abs(twice(i, j) - t.a(i, j)) > 1e-14) return false;
  return true;
}

bool is_invertible(const Matrix& a, double rel_tol) {
  if (!a.square()) return false;
  const std::size_t n = a.rows();
  const double threshold = rel_tol * a.max_abs();
  if (n == 0 || a.max_abs() == 0.0) return false;
  Matrix m = a;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(m(r, k)) > std::abs(m(piv, k))) piv = r;
    if (std::abs(m(piv, k)) <= threshold) return false;
    if (piv != k)
      for (std::size_t c = 0; c < n; ++c) std::swap(m(k, c), m(piv, c));
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = m(r, k) / m(k, k);
      for (std::size_t c = k; c < n; ++c) m(r, c) -= f * m(k, c);
    }
  }
  return true;
}

bool check_well_defined(const Tableau& t, const Matrix& a_prime, std::span<const double> b_prime) {
  t.validate();
  if (!is_invertible(t.a)) throw SingularTableau("check_well_defined: Runge-Kutta matrix is singular");
  const std::size_t s = t.b.size();
  if (a_prime.rows() != s || a_prime.cols() != s || b_prime.size() != s)
    throw InvalidArgument("check_well_defined: a'/b' shape mismatch");
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t k = 0; k < s; ++k)
      if (std::abs(a_prime(j, k) - b_prime[k] * t.a(k, j) / t.b[j]) > 1e-13) return false;
  return true;
}

Matrix momentum_expansion_from_conjugate(const Tableau& t, const Matrix& conjugate) {
  const std::size_t s = t.b.size();
  if (conjugate.rows() != s || conjugate.cols() != s) throw InvalidArgument("conjugate shape mismatch");
  Matrix a_prime(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) a_prime(i, j) = t.b[j] - conjugate(i, j);
  return a_prime;
}

Tableau gauss1() { return Tableau{{0.5}, {1.0}, Matrix{{0.5}}}; }

EulerPair euler_pair() { return EulerPair{Tableau{{1.0}, {1.0}, Matrix{{1.0}}}, Matrix{{0.0}}}; }

PrkScheme PrkScheme::from_tableaus(Tableau time, Tableau space) {
  time.validate();
  space.validate();
  PrkScheme p;
  p.time_conjugate = symplectic_pair(time);
  p.space_conjugate = symplectic_pair(space);
  p.b_prime = time.b;
  p.b_tilde_prime = space.b;
  p.time = std::move(time);
  p.space = std::move(space);
  return p;
}

void PrkScheme::require_invertible() const {
  if (!is_invertible(time.a)) throw SingularTableau("temporal Runge-Kutta matrix is singular");
  if (!is_invertible(space.a)) throw SingularTableau("spatial Runge-Kutta matrix is singular");
}

PrkScheme build_explicit_pair(const Tableau& t) {
  Tableau primal = t;
  primal.a = symplectic_pair(t);
  for (std::size_t i = 0; i < primal.c.size(); ++i) {
    const auto r = primal.a.row(i);
    primal.c[i] = std::accumulate(r.begin(), r.end(), 0.0);
  }
  PrkScheme p;
  p.time = primal;
  p.space = primal;
  p.time_conjugate = t.a;
  p.space_conjugate = t.a;
  p.b_prime = t.b;
  p.b_tilde_prime = t.b;
  return p;
}

}  // namespace msvi
