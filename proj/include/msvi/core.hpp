#pragma once

// Shared domain types: grids, node-indexed field states, per-box face data,
// internal stages, tangent vectors, the Hamiltonian interface and the wedge
// two-forms omega^mu = dphi ^ dp^mu.
//
// Face convention (used by every module): time runs along the first index,
// space along the second. For the box [t, t+dt] x [x, x+dx] the "A" faces
// are the backward ones (t = const lower edge, x = const left edge) and the
// "B" faces are the forward ones. Values on constant-x edges are sampled at
// the temporal quadrature nodes t + c_i dt (s of them); values on constant-t
// edges at the spatial nodes x + c~_alpha dx (sigma of them).

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msvi {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated precondition on user-supplied data (shapes, ranges, indices).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Row-major dense matrix of doubles. Small by intent (tableaus, box
/// Jacobians); large systems go through linalg's banded storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double max_abs() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Rectangular spacetime grid of n_t x n_x cells.
struct GridSpec {
  double t0 = 0.0;
  double x0 = 0.0;
  double dt = 1.0;
  double dx = 1.0;
  int n_t = 1;
  int n_x = 1;

  /// Throws InvalidArgument unless dt, dx > 0 and n_t, n_x >= 1.
  void validate() const;
  double t(int a) const { return t0 + a * dt; }
  double x(int b) const { return x0 + b * dx; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// (n_t+1) x (n_x+1) array indexed by node (a, b).
class NodeArray {
 public:
  NodeArray() = default;
  NodeArray(int n_levels, int n_nodes, double fill = 0.0)
      : levels_(n_levels), nodes_(n_nodes),
        data_(static_cast<std::size_t>(n_levels) * n_nodes, fill) {}

  int levels() const { return levels_; }
  int nodes() const { return nodes_; }
  double& operator()(int a, int b) { return data_[index(a, b)]; }
  double operator()(int a, int b) const { return data_[index(a, b)]; }
  std::span<double> level(int a) { return {data_.data() + index(a, 0), std::size_t(nodes_)}; }
  std::span<const double> level(int a) const {
    return {data_.data() + index(a, 0), std::size_t(nodes_)};
  }
  std::span<const double> values() const { return data_; }

 private:
  std::size_t index(int a, int b) const { return std::size_t(a) * nodes_ + b; }

  int levels_ = 0;
  int nodes_ = 0;
  std::vector<double> data_;
};

/// Node values of phi, p0 and p1 over a whole grid.
struct FieldState {
  GridSpec grid;
  NodeArray phi;
  NodeArray p0;
  NodeArray p1;

  static FieldState zeros(const GridSpec& grid);
  /// False as soon as any entry is NaN or infinite.
  bool all_finite() const;
};

/// A point (phi, p0, p1) of the restricted dual jet fibre.
struct FibrePoint {
  double phi = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Evaluable Hamiltonian H(phi, p0, p1). Component order everywhere is
/// (phi, p0, p1).
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual double value(const FibrePoint& z) const = 0;
  virtual Vec3 gradient(const FibrePoint& z) const = 0;
  /// Models without second derivatives return false; callers then fall
  /// back to differencing the gradient.
  virtual bool has_hessian() const { return false; }
  virtual Mat3 hessian(const FibrePoint& z) const;
};

using HamiltonianPtr = std::shared_ptr<const HamiltonianModel>;

/// Face values of a single box. The same layout carries boundary data
/// (BoxData) and its variations (BoxTangent).
struct BoxFaces {
  std::vector<double> phi_A_time;   // phi_[i]0, backward x face, s entries
  std::vector<double> phi_A_space;  // phi_0[alpha], backward t face, sigma entries
  std::vector<double> pi0_A;        // sigma
  std::vector<double> pi1_A;        // s
  std::vector<double> phi_B_time;   // phi_[i]1
  std::vector<double> phi_B_space;  // phi_1[alpha]
  std::vector<double> pi0_B;
  std::vector<double> pi1_B;

  int s() const { return static_cast<int>(phi_A_time.size()); }
  int sigma() const { return static_cast<int>(phi_A_space.size()); }
  /// Throws InvalidArgument if any array length differs from (s, sigma).
  void check_shape(int s, int sigma) const;
  bool all_finite() const;
};

struct BoxData : BoxFaces {
  static BoxData zeros(int s, int sigma);
};

struct BoxTangent : BoxFaces {
  static BoxTangent zeros(int s, int sigma);
};

/// s x sigma stage arrays, entry (i, alpha) at i * sigma + alpha.
struct InternalStages {
  int s = 0;
  int sigma = 0;
  std::vector<double> Phi, P0, P1, V, W, X, Y;

  static InternalStages zeros(int s, int sigma);
  std::size_t at(int i, int alpha) const { return std::size_t(i) * sigma + alpha; }
};

/// A converged box: its boundary data together with the stages.
struct BoxRecord {
  BoxData data;
  InternalStages stages;
};

/// Variation (dphi, dp0, dp1) at one point.
struct TangentVector {
  double dphi = 0.0;
  double dp0 = 0.0;
  double dp1 = 0.0;
};

/// Arrays of variations shadowing a FieldState or a face layout.
struct TangentField {
  std::vector<double> d_phi;
  std::vector<double> d_p0;
  std::vector<double> d_p1;
};

/// omega^mu(U, V) = U.dphi V.dp^mu - V.dphi U.dp^mu for mu in {0, 1}.
double wedge_omega(int mu, const TangentVector& u, const TangentVector& v);

/// Gathers the face data of cell (a, b) from node arrays. Only nodes that
/// coincide with box corners are representable here, so every entry of
/// `c_time` / `c_space` must be 0 (backward corner) or 1 (forward corner);
/// multi-node faces live in the face-indexed trajectory instead.
BoxData extract_box(const FieldState& state, int a, int b,
                    std::span<const double> c_time,
                    std::span<const double> c_space);

}  // namespace msvi
