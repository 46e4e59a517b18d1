#pragma once

// Stage equations of one box as a residual over a flat local vector
//
//   z = [V, W, X, Y (s*sigma each), phi_L (s), pi1_L (s), phi_0 (sigma), pi0_0 (sigma)]
//
// with four residual blocks (V-law, W-law, X+Y-law, single-valuedness) and a
// linear output map to the forward faces
//
//   out = [phi_1 (sigma), pi0_1 (sigma), phi_R (s), pi1_R (s)].
//
// The per-box Newton solve, the slice solve and the tangent map all drive
// this one assembler.

#include <span>
#include <vector>

#include "msvi/core.hpp"
#include "msvi/tableau.hpp"

namespace msvi {

enum class JacobianMode { symbolic_hessian, finite_difference };

class BoxSystem {
 public:
  BoxSystem(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
            JacobianMode mode = JacobianMode::symbolic_hessian, double fd_step = 1e-7);

  int s() const { return s_; }
  int sigma() const { return sigma_; }
  int n_stage() const { return 4 * n_; }
  int n_vars() const { return 4 * n_ + 2 * s_ + 2 * sigma_; }
  int n_out() const { return 2 * s_ + 2 * sigma_; }

  int col_V(int k) const { return k; }
  int col_W(int k) const { return n_ + k; }
  int col_X(int k) const { return 2 * n_ + k; }
  int col_Y(int k) const { return 3 * n_ + k; }
  int col_phiL(int i) const { return 4 * n_ + i; }
  int col_pi1L(int i) const { return 4 * n_ + s_ + i; }
  int col_phi0(int a) const { return 4 * n_ + 2 * s_ + a; }
  int col_pi00(int a) const { return 4 * n_ + 2 * s_ + sigma_ + a; }

  int out_phi1(int a) const { return a; }
  int out_pi01(int a) const { return sigma_ + a; }
  int out_phiR(int i) const { return 2 * sigma_ + i; }
  int out_pi1R(int i) const { return 2 * sigma_ + s_ + i; }

  /// r has n_stage() entries.
  void residual(std::span<const double> z, std::span<double> r) const;
  /// n_stage() x n_vars().
  Matrix jacobian(std::span<const double> z) const;
  void outputs(std::span<const double> z, std::span<double> out) const;
  /// n_out() x n_vars(); constant.
  const Matrix& output_map() const { return out_map_; }

  InternalStages stages(std::span<const double> z) const;
  /// Writes the A-face arrays of `faces` into the data slots of z.
  void load_backward_faces(const BoxFaces& faces, std::span<double> z) const;
  void load_stages(const InternalStages& st, std::span<double> z) const;
  /// Copies an output vector into the B-face arrays of `faces`.
  void store_forward_faces(std::span<const double> out, BoxFaces& faces) const;

 private:
  struct Term {
    int col;
    double coef;
  };
  void expand(std::span<const double> z, std::vector<double>& phi, std::vector<double>& p0,
              std::vector<double>& p1) const;
  Mat3 second_derivatives(const FibrePoint& p) const;

  const HamiltonianModel& h_;
  PrkScheme scheme_;
  double dt_, dx_;
  JacobianMode mode_;
  double fd_step_;
  int s_, sigma_, n_;
  // d(Phi_k)/dz, d(P0_k)/dz, d(P1_k)/dz as sparse rows
  std::vector<std::vector<Term>> dphi_, dp0_, dp1_;
  Matrix out_map_;
};

}  // namespace msvi
