#pragma once

// Box-level forward map, implicit timeslice marching and the explicit
// multisymplectic-Euler / forward-Euler paths for
// H = p0^2/2 - p1^2/2 + V(phi).

#include <functional>
#include <span>
#include <vector>

#include "msvi/box_system.hpp"
#include "msvi/core.hpp"
#include "msvi/hamdsl.hpp"
#include "msvi/tableau.hpp"

namespace msvi {

struct SolverConfig {
  double newton_tol = 1e-12;  // max-norm residual
  int newton_max_iter = 50;
  JacobianMode jacobian_mode = JacobianMode::symbolic_hessian;
  double fd_step = 1e-7;

  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Solver failure; slice/cell are -1 when not applicable.
class SolveError : public Error {
 public:
  SolveError(const std::string& what, int slice, int cell);
  int slice() const { return slice_; }
  int cell() const { return cell_; }

 private:
  int slice_, cell_;
};

class NewtonDivergence : public SolveError {
 public:
  NewtonDivergence(double residual, int iterations, int slice = -1, int cell = -1);
  double residual() const { return residual_; }

 private:
  double residual_;
};

class SingularJacobian : public SolveError {
 public:
  SingularJacobian(int slice = -1, int cell = -1);
};

enum class BcKind { dirichlet, neumann };

/// dirichlet prescribes phi, neumann prescribes pi1; value(t), null means 0.
struct BoundarySide {
  BcKind kind = BcKind::neumann;
  std::function<double(double)> value;

  double at(double t) const { return value ? value(t) : 0.0; }
};

struct BoundaryConditionSpec {
  BoundarySide left;
  BoundarySide right;
};

struct BoxSolution {
  BoxRecord record;  // input A faces, computed B faces, stages
  int iterations = 0;
  double residual = 0.0;
};

/// Forward map of one box: reads only the A faces of `box`. Throws
/// SingularTableau, SingularJacobian or NewtonDivergence. `guess` seeds
/// V, W, X, Y (zero otherwise).
BoxSolution solve_box_forward(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                              const BoxFaces& box, const SolverConfig& cfg,
                              const InternalStages* guess = nullptr);

struct InitialData {
  std::function<double(double)> phi;
  std::function<double(double)> p0;
};

enum class Outcome { completed, diverged };

struct MarchOptions {
  bool record_boxes = false;
};

/// Face-indexed result of an implicit march. Level a holds phi and pi0 at
/// the sigma spatial quadrature nodes of every box on t = t_a
/// (entry b * sigma + alpha); slice a holds phi and pi1 at the s temporal
/// quadrature nodes of every vertical edge e = 0..n_x (entry e * s + i).
struct Trajectory {
  GridSpec grid;
  PrkScheme scheme;
  std::vector<std::vector<double>> level_phi, level_p0;
  std::vector<std::vector<double>> edge_phi, edge_p1;
  std::vector<std::vector<BoxRecord>> boxes;  // per completed slice when recorded
  std::vector<double> initial_phi, initial_p0;  // t0 at grid nodes
  Outcome outcome = Outcome::completed;
  int failed_slice = -1;
  int failed_cell = -1;  // first box with a non-finite value

  int completed_slices() const { return static_cast<int>(edge_phi.size()); }
  BoxData box(int a, int b) const;
  /// s = sigma = 1 with c = c~ = 1, where face nodes are forward corners.
  bool has_node_layout() const;
  /// Node arrays for the corner layout; p0 at x0 copies its neighbour and
  /// level-0 p1 is the forward difference -(phi_{b+1} - phi_b)/dx.
  FieldState nodes() const;
};

/// Marches slice by slice, each slice one banded Newton system. A non-finite
/// iterate ends the march with outcome diverged; other failures throw with
/// the slice and cell attached.
Trajectory march(const HamiltonianModel& h, const PrkScheme& scheme, const GridSpec& grid,
                 const InitialData& initial, const BoundaryConditionSpec& bc, const SolverConfig& cfg,
                 const MarchOptions& opts = {});

/// Linearized slice map about recorded slice a: variations of level-a data
/// (b * sigma + alpha layout) to face variations of every box in the slice.
/// Prescribed boundary values are held fixed.
std::vector<BoxTangent> tangent_slice(const HamiltonianModel& h, const Trajectory& traj, int a,
                                      const BoundaryConditionSpec& bc, std::span<const double> dphi,
                                      std::span<const double> dp0, const SolverConfig& cfg);

// Explicit path.

struct Slice {
  std::vector<double> phi;  // n_x + 1 nodes
  std::vector<double> p0;
};

/// Multisymplectic Euler: phi update, then the momentum update evaluated on
/// the new level. `t_new` is the time of the produced level. Neumann walls
/// use the mirror ghost phi_{-1} = phi_1 + 2 dx pi1, phi_{M+1} =
/// phi_{M-1} - 2 dx pi1; Dirichlet walls pin phi.
Slice explicit_mse_step(const Slice& in, double t_new, double dt, double dx, const dsl::ScalarFunction& dV,
                        const BoundaryConditionSpec& bc);
/// Forward Euler: both updates read the old level.
Slice explicit_fe_step(const Slice& in, double t_new, double dt, double dx, const dsl::ScalarFunction& dV,
                       const BoundaryConditionSpec& bc);

enum class ExplicitMethod { mse, fe };

struct ExplicitTrajectory {
  GridSpec grid;
  NodeArray phi, p0;
  Outcome outcome = Outcome::completed;
  int failed_slice = -1;
  int failed_cell = -1;  // first non-finite node
  int levels = 0;  // filled levels, including t0
  double max_abs_phi = 0.0;

  /// Adds p1 = -(phi_{b+1} - phi_b)/dx, closed at the last node by the
  /// right boundary value (Neumann) or the backward difference.
  FieldState field_state(const BoundaryConditionSpec& bc) const;
};

ExplicitTrajectory explicit_march(ExplicitMethod method, const GridSpec& grid, const InitialData& initial,
                                  const dsl::ScalarFunction& dV, const BoundaryConditionSpec& bc);

}  // namespace msvi
