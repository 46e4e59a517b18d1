#pragma once

// LU factorizations backed by LAPACKE. Both report a numerically singular
// matrix when a pivot falls below rel_tol * max|A|.

#include <span>
#include <vector>

#include "msvi/core.hpp"

namespace msvi {

class DenseLU {
 public:
  explicit DenseLU(const Matrix& a, double rel_tol = 1e-13);

  bool singular() const { return singular_; }
  std::size_t size() const { return n_; }
  /// Overwrites rhs with A^{-1} rhs.
  void solve(std::span<double> rhs) const;
  /// Solves for every column of B in place.
  void solve(Matrix& b) const;

 private:
  std::size_t n_;
  std::vector<double> lu_;  // column-major
  std::vector<int> ipiv_;
  bool singular_ = false;
};

struct Triplet {
  int row, col;
  double value;
};

/// Square banded matrix assembled from triplets (duplicates are summed).
class BandedLU {
 public:
  BandedLU(int n, std::span<const Triplet> entries, double rel_tol = 1e-13);

  bool singular() const { return singular_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }
  /// Column of the first rejected pivot, -1 when nonsingular.
  int failed_pivot() const { return failed_; }
  void solve(std::span<double> rhs) const;

 private:
  int n_, kl_ = 0, ku_ = 0, ldab_ = 1;
  std::vector<double> ab_;
  std::vector<int> ipiv_;
  bool singular_ = false;
  int failed_ = -1;
};

}  // namespace msvi
