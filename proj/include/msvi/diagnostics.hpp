#pragma once

// Discrete first variations of a box and the residuals that certify the
// multisymplectic conservation law, the Noether balance, the Cartan form and
// the difference-operator form of the field equations.

#include <cstdint>
#include <string>
#include <vector>

#include "msvi/core.hpp"
#include "msvi/solver.hpp"
#include "msvi/tableau.hpp"

namespace msvi {

/// Linearization of the box forward map about a converged record. Only the
/// A-face entries of `dA` are read; the result carries dA on the A faces and
/// the induced variations on the B faces. `dstages`, when given, receives
/// (dV, dW, dX, dY) variations.
BoxTangent tangent_box(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                       const BoxRecord& base, const BoxFaces& dA, InternalStages* dstages = nullptr);

/// Quadrature-weighted flux of omega^1 through the x faces plus omega^0
/// through the t faces, forward minus backward.
double msf_residual(const PrkScheme& scheme, double dt, double dx, const BoxFaces& u, const BoxFaces& v);

/// The same balance assembled as d0 omega^0 + d1 omega^1 with the box
/// difference operators; equals msf_residual / (dt dx).
double msf_difference_form(const PrkScheme& scheme, double dt, double dx, const BoxFaces& u, const BoxFaces& v);

/// Momentum flux balance of a constant vertical translation phi -> phi + xi.
double noether_residual(const PrkScheme& scheme, double dt, double dx, const BoxFaces& box, double xi);

/// Faces of a box. The space faces sit at constant x and carry the s time
/// nodes; the time faces sit at constant t and carry the sigma space nodes.
enum Face : unsigned {
  space_backward = 1u,
  space_forward = 2u,
  time_backward = 4u,
  time_forward = 8u,
  backward_faces = space_backward | time_backward,
  forward_faces = space_forward | time_forward,
};

/// Sum over the quadrature nodes of the faces in `faces` of
/// weight * normal momentum * dphi.
double cartan_eval(unsigned faces, const PrkScheme& scheme, double dt, double dx, const BoxFaces& box,
                   const BoxFaces& variation);

struct DdwResidual {
  double momentum = 0.0;
  double phi_t = 0.0;
  double phi_x = 0.0;

  double max_abs() const;
};

DdwResidual avg_ddw_residual(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                             const BoxRecord& box);

/// Centered box-scheme relations for a one-stage box: the field and momenta
/// at the centre are averages of the four face values.
DdwResidual preissman_residual(const HamiltonianModel& h, double dt, double dx, const BoxFaces& box);

struct DiagnosticRow {
  int a, b;
  std::string name;
  double value;
};

struct SweepOptions {
  int tangent_pairs = 1;  // random tangent pairs per box for msf
  std::uint64_t seed = 1;
  double xi = 1.0;
};

/// msf, noether and ddw residuals over every recorded box of `traj`. The
/// tangents come from the linearized slice map so schemes without a
/// per-box forward map are covered too.
std::vector<DiagnosticRow> sweep(const HamiltonianModel& h, const Trajectory& traj, const BoundaryConditionSpec& bc,
                                 const SolverConfig& cfg, const SweepOptions& opts = {});

}  // namespace msvi
