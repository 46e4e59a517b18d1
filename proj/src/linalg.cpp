#include "msvi/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <lapacke.h>

namespace msvi {

DenseLU::DenseLU(const Matrix& a, double rel_tol) : n_(a.rows()), lu_(a.rows() * a.cols()), ipiv_(a.rows()) {
  if (!a.square()) throw InvalidArgument(fmt::format("DenseLU: matrix is {}x{}", a.rows(), a.cols()));
  if (n_ == 0) return;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) lu_[j * n_ + i] = a(i, j);
  const double scale = a.max_abs();
  const lapack_int n = static_cast<lapack_int>(n_);
  const lapack_int info = LAPACKE_dgetrf(LAPACK_COL_MAJOR, n, n, lu_.data(), n, ipiv_.data());
  if (info < 0) throw Error(fmt::format("dgetrf: illegal argument {}", -info));
  singular_ = info > 0 || scale == 0.0;
  for (std::size_t k = 0; k < n_ && !singular_; ++k)
    if (!(std::abs(lu_[k * n_ + k]) > rel_tol * scale)) singular_ = true;
}

void DenseLU::solve(std::span<double> rhs) const {
  if (rhs.size() != n_) throw InvalidArgument("DenseLU::solve: size mismatch");
  if (singular_) throw Error("DenseLU::solve: matrix is singular");
  if (n_ == 0) return;
  const lapack_int n = static_cast<lapack_int>(n_);
  LAPACKE_dgetrs(LAPACK_COL_MAJOR, 'N', n, 1, lu_.data(), n, ipiv_.data(), rhs.data(), n);
}

void DenseLU::solve(Matrix& b) const {
  if (b.rows() != n_) throw InvalidArgument("DenseLU::solve: size mismatch");
  std::vector<double> col(n_);
  for (std::size_t j = 0; j < b.cols(); ++j) {
    for (std::size_t i = 0; i < n_; ++i) col[i] = b(i, j);
    solve(col);
    for (std::size_t i = 0; i < n_; ++i) b(i, j) = col[i];
  }
}

BandedLU::BandedLU(int n, std::span<const Triplet> entries, double rel_tol) : n_(n), ipiv_(std::size_t(std::max(n, 1))) {
  if (n < 1) throw InvalidArgument("BandedLU: empty system");
  double scale = 0.0;
  for (const Triplet& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      throw InvalidArgument(fmt::format("BandedLU: entry ({}, {}) outside {}x{}", t.row, t.col, n, n));
    kl_ = std::max(kl_, t.row - t.col);
    ku_ = std::max(ku_, t.col - t.row);
  }
  // dgbtrf needs kl extra rows for fill-in above the stored band.
  ldab_ = 2 * kl_ + ku_ + 1;
  ab_.assign(std::size_t(ldab_) * n, 0.0);
  for (const Triplet& t : entries) ab_[std::size_t(t.col) * ldab_ + kl_ + ku_ + t.row - t.col] += t.value;
  for (double v : ab_) scale = std::max(scale, std::abs(v));
  const lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl_, ku_, ab_.data(), ldab_, ipiv_.data());
  if (info < 0) throw Error(fmt::format("dgbtrf: illegal argument {}", -info));
  if (info > 0) failed_ = info - 1;
  for (int k = 0; k < n && failed_ < 0; ++k)
    if (!(std::abs(ab_[std::size_t(k) * ldab_ + kl_ + ku_]) > rel_tol * scale)) failed_ = k;
  singular_ = failed_ >= 0;
}

void BandedLU::solve(std::span<double> rhs) const {
  if (static_cast<int>(rhs.size()) != n_) throw InvalidArgument("BandedLU::solve: size mismatch");
  if (singular_) throw Error("BandedLU::solve: matrix is singular");
  LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n_, kl_, ku_, 1, ab_.data(), ldab_, ipiv_.data(), rhs.data(), n_);
}

}  // namespace msvi
