#include "msvi/core.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace msvi {

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

void GridSpec::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument(fmt::format("grid: dt must be > 0 (got {})", dt));
  if (!(dx > 0.0) || !std::isfinite(dx)) throw InvalidArgument(fmt::format("grid: dx must be > 0 (got {})", dx));
  if (n_t < 1) throw InvalidArgument(fmt::format("grid: n_t must be >= 1 (got {})", n_t));
  if (n_x < 1) throw InvalidArgument(fmt::format("grid: n_x must be >= 1 (got {})", n_x));
}

FieldState FieldState::zeros(const GridSpec& grid) {
  grid.validate();
  return FieldState{grid, NodeArray(grid.n_t + 1, grid.n_x + 1),
                    NodeArray(grid.n_t + 1, grid.n_x + 1),
                    NodeArray(grid.n_t + 1, grid.n_x + 1)};
}

namespace {
bool finite_span(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}
}  // namespace

bool FieldState::all_finite() const {
  return finite_span(phi.values()) && finite_span(p0.values()) && finite_span(p1.values());
}

Mat3 HamiltonianModel::hessian(const FibrePoint&) const {
  throw Error("HamiltonianModel: this model provides no second derivatives");
}

void BoxFaces::check_shape(int s, int sigma) const {
  auto expect = [](const std::vector<double>& v, int n, const char* name) {
    if (static_cast<int>(v.size()) != n)
      throw InvalidArgument(fmt::format("box face array {} has length {}, expected {}", name, v.size(), n));
  };
  expect(phi_A_time, s, "phi_A_time");
  expect(pi1_A, s, "pi1_A");
  expect(phi_B_time, s, "phi_B_time");
  expect(pi1_B, s, "pi1_B");
  expect(phi_A_space, sigma, "phi_A_space");
  expect(pi0_A, sigma, "pi0_A");
  expect(phi_B_space, sigma, "phi_B_space");
  expect(pi0_B, sigma, "pi0_B");
}

bool BoxFaces::all_finite() const {
  for (const auto* v : {&phi_A_time, &phi_A_space, &pi0_A, &pi1_A, &phi_B_time, &phi_B_space, &pi0_B, &pi1_B})
    if (!finite_span(*v)) return false;
  return true;
}

namespace {
template <class T>
T zero_faces(int s, int sigma) {
  if (s < 1 || sigma < 1) throw InvalidArgument("stage counts must be >= 1");
  T f;
  const auto us = std::size_t(s), ug = std::size_t(sigma);
  f.phi_A_time.assign(us, 0.0);
  f.pi1_A.assign(us, 0.0);
  f.phi_B_time.assign(us, 0.0);
  f.pi1_B.assign(us, 0.0);
  f.phi_A_space.assign(ug, 0.0);
  f.pi0_A.assign(ug, 0.0);
  f.phi_B_space.assign(ug, 0.0);
  f.pi0_B.assign(ug, 0.0);
  return f;
}
}  // namespace

BoxData BoxData::zeros(int s, int sigma) { return zero_faces<BoxData>(s, sigma); }
BoxTangent BoxTangent::zeros(int s, int sigma) { return zero_faces<BoxTangent>(s, sigma); }

InternalStages InternalStages::zeros(int s, int sigma) {
  if (s < 1 || sigma < 1) throw InvalidArgument("stage counts must be >= 1");
  const std::size_t n = std::size_t(s) * sigma;
  InternalStages st;
  st.s = s;
  st.sigma = sigma;
  for (auto* v : {&st.Phi, &st.P0, &st.P1, &st.V, &st.W, &st.X, &st.Y}) v->assign(n, 0.0);
  return st;
}

double wedge_omega(int mu, const TangentVector& u, const TangentVector& v) {
  if (mu == 0) return u.dphi * v.dp0 - v.dphi * u.dp0;
  if (mu == 1) return u.dphi * v.dp1 - v.dphi * u.dp1;
  throw InvalidArgument(fmt::format("wedge_omega: direction index must be 0 or 1 (got {})", mu));
}

BoxData extract_box(const FieldState& state, int a, int b,
                    std::span<const double> c_time,
                    std::span<const double> c_space) {
  const GridSpec& g = state.grid;
  if (a < 0 || a >= g.n_t || b < 0 || b >= g.n_x)
    throw InvalidArgument(fmt::format("extract_box: cell ({}, {}) outside {} x {} grid", a, b, g.n_t, g.n_x));
  auto corner = [](double c) {
    if (c == 0.0) return 0;
    if (c == 1.0) return 1;
    throw InvalidArgument(fmt::format(
        "extract_box: quadrature node {} is not a box corner; use face-indexed storage", c));
  };
  BoxData box = BoxData::zeros(static_cast<int>(c_time.size()), static_cast<int>(c_space.size()));
  for (std::size_t i = 0; i < c_time.size(); ++i) {
    const int ta = a + corner(c_time[i]);
    box.phi_A_time[i] = state.phi(ta, b);
    box.pi1_A[i] = state.p1(ta, b);
    box.phi_B_time[i] = state.phi(ta, b + 1);
    box.pi1_B[i] = state.p1(ta, b + 1);
  }
  for (std::size_t al = 0; al < c_space.size(); ++al) {
    const int xb = b + corner(c_space[al]);
    box.phi_A_space[al] = state.phi(a, xb);
    box.pi0_A[al] = state.p0(a, xb);
    box.phi_B_space[al] = state.phi(a + 1, xb);
    box.pi0_B[al] = state.p0(a + 1, xb);
  }
  return box;
}

}  // namespace msvi
