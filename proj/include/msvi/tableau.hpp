#pragma once

// Runge-Kutta coefficient containers for the two spacetime directions and
// the symplectic-pair transform a2_ij = (b_j b_i - b_j a_ji) / b_i.

#include <span>
#include <vector>

#include "msvi/core.hpp"

namespace msvi {

class ZeroWeight : public Error {
 public:
  using Error::Error;
};

class SingularTableau : public Error {
 public:
  using Error::Error;
};

struct Tableau {
  std::vector<double> c;
  std::vector<double> b;
  Matrix a;

  int stages() const { return static_cast<int>(b.size()); }

  /// Shapes agree, sum(b) = 1 to 1e-14 and every b_i != 0. Throws ZeroWeight
  /// for a vanishing weight, InvalidArgument otherwise.
  void validate() const;

  friend bool operator==(const Tableau&, const Tableau&) = default;
};

/// Conjugate matrix (b_j b_i - b_j a_ji) / b_i. Throws ZeroWeight.
Matrix symplectic_pair(const Tableau& t);

/// symplectic_pair applied twice reproduces a entrywise to 1e-14.
bool involution_check(const Tableau& t);

/// Partial-pivot elimination with pivot threshold rel_tol * max|entry|.
bool is_invertible(const Matrix& a, double rel_tol = 1e-12);

/// True iff a'_jk = b'_k a_kj / b_j entrywise to 1e-13, where a' is the
/// momentum-expansion matrix written relative to the forward face
/// (P_i = pi_B - h sum_j a'_ij X_j). Throws SingularTableau if t.a fails the
/// invertibility test.
bool check_well_defined(const Tableau& t, const Matrix& a_prime, std::span<const double> b_prime);

/// a'_ij = b_j - a2_ij: converts a conjugate (A-face form) into the B-face
/// momentum-expansion matrix that check_well_defined expects.
Matrix momentum_expansion_from_conjugate(const Tableau& t, const Matrix& conjugate);

/// One-point Gauss-Legendre (midpoint): c = 1/2, b = 1, a = 1/2.
Tableau gauss1();

struct EulerPair {
  Tableau tableau;  // c = 1, b = 1, a = 1
  Matrix conjugate; // [[0]]
};
EulerPair euler_pair();

/// Time and space tableaus with their symplectic conjugates.
struct PrkScheme {
  Tableau time;
  Tableau space;
  Matrix time_conjugate;
  Matrix space_conjugate;
  std::vector<double> b_prime;
  std::vector<double> b_tilde_prime;

  /// Validates both tableaus and derives the conjugates and b', b~'.
  static PrkScheme from_tableaus(Tableau time, Tableau space);

  int s() const { return time.stages(); }
  int sigma() const { return space.stages(); }

  /// Throws SingularTableau unless both primal matrices are invertible.
  void require_invertible() const;
};

/// Scheme whose primal matrix is symplectic_pair(t) and whose conjugate is
/// t.a, in both directions. Nodes are the row sums of the new primal
/// matrix. Feeding an explicit tableau (a = [[0]]) gives the explicit
/// multisymplectic Euler pair.
PrkScheme build_explicit_pair(const Tableau& t);

}  // namespace msvi
