#include "msvi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "msvi/box_system.hpp"
#include "msvi/linalg.hpp"

namespace msvi {

namespace {

void check_pair(const PrkScheme& scheme, const BoxFaces& u, const BoxFaces& v) {
  u.check_shape(scheme.s(), scheme.sigma());
  v.check_shape(scheme.s(), scheme.sigma());
}

// The balance sums cancel face terms of order dt^-1 down to roundoff, so
// omega and the accumulations carry an error term (double-double). Every
// step is negation-symmetric, which keeps msf(V, U) == -msf(U, V) exact.
struct DoubleDouble {
  double hi = 0.0, lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

// omega(U, V) = dphi_u dp_v - dphi_v dp_u
DoubleDouble omega(double du_phi, double du_p, double dv_phi, double dv_p) {
  const double p = du_phi * dv_p, q = dv_phi * du_p;
  const double ep = std::fma(du_phi, dv_p, -p), eq = std::fma(dv_phi, du_p, -q);
  const DoubleDouble d = two_sum(p, -q);
  return {d.hi, d.lo + (ep - eq)};
}

class CompensatedSum {
 public:
  void add(double x) {
    const DoubleDouble d = two_sum(hi_, x);
    hi_ = d.hi;
    lo_ += d.lo;
  }
  void add(const DoubleDouble& x, double w) {
    const double p = w * x.hi;
    add(p);
    lo_ += std::fma(w, x.hi, -p) + w * x.lo;
  }
  // x / d, with the division remainder recovered exactly
  void add_quotient(const DoubleDouble& x, double d) {
    const double q = x.hi / d;
    add(q);
    lo_ += (std::fma(-q, d, x.hi) + x.lo) / d;
  }
  DoubleDouble total() const { return two_sum(hi_, lo_); }
  double value() const { return hi_ + lo_; }

 private:
  double hi_ = 0.0, lo_ = 0.0;
};

// Weighted sums of omega^1 over the x faces and omega^0 over the t faces,
// forward minus backward, without the face lengths.
struct FaceFlux {
  DoubleDouble x_faces;  // sum_i b_i (omega^1_B - omega^1_A)
  DoubleDouble t_faces;  // sum_alpha b~_alpha (omega^0_B - omega^0_A)
};

FaceFlux omega_flux(const PrkScheme& scheme, const BoxFaces& u, const BoxFaces& v) {
  CompensatedSum x, t;
  for (int i = 0; i < scheme.s(); ++i) {
    x.add(omega(u.phi_B_time[i], u.pi1_B[i], v.phi_B_time[i], v.pi1_B[i]), scheme.time.b[i]);
    x.add(omega(u.phi_A_time[i], u.pi1_A[i], v.phi_A_time[i], v.pi1_A[i]), -scheme.time.b[i]);
  }
  for (int al = 0; al < scheme.sigma(); ++al) {
    t.add(omega(u.phi_B_space[al], u.pi0_B[al], v.phi_B_space[al], v.pi0_B[al]), scheme.space.b[al]);
    t.add(omega(u.phi_A_space[al], u.pi0_A[al], v.phi_A_space[al], v.pi0_A[al]), -scheme.space.b[al]);
  }
  return {x.total(), t.total()};
}

}  // namespace

BoxTangent tangent_box(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                       const BoxRecord& base, const BoxFaces& dA, InternalStages* dstages) {
  const BoxSystem box(h, scheme, dt, dx);
  base.data.check_shape(box.s(), box.sigma());
  dA.check_shape(box.s(), box.sigma());
  const int ns = box.n_stage(), nv = box.n_vars();

  std::vector<double> z(static_cast<std::size_t>(nv), 0.0);
  box.load_stages(base.stages, z);
  box.load_backward_faces(base.data, z);
  const Matrix j = box.jacobian(z);

  std::vector<double> dz(z.size(), 0.0);
  box.load_backward_faces(dA, dz);
  Matrix jss(static_cast<std::size_t>(ns), static_cast<std::size_t>(ns));
  std::vector<double> rhs(static_cast<std::size_t>(ns), 0.0);
  for (int r = 0; r < ns; ++r) {
    for (int c = 0; c < ns; ++c) jss(r, c) = j(r, c);
    for (int c = ns; c < nv; ++c) rhs[r] -= j(r, c) * dz[c];
  }
  const DenseLU lu(jss);
  if (lu.singular()) throw SingularJacobian();
  lu.solve(rhs);
  std::copy(rhs.begin(), rhs.end(), dz.begin());

  if (dstages) *dstages = box.stages(dz);
  BoxTangent t = BoxTangent::zeros(box.s(), box.sigma());
  t.phi_A_time = dA.phi_A_time;
  t.phi_A_space = dA.phi_A_space;
  t.pi0_A = dA.pi0_A;
  t.pi1_A = dA.pi1_A;
  std::vector<double> out(static_cast<std::size_t>(box.n_out()));
  box.outputs(dz, out);
  box.store_forward_faces(out, t);
  return t;
}

double msf_residual(const PrkScheme& scheme, double dt, double dx, const BoxFaces& u, const BoxFaces& v) {
  check_pair(scheme, u, v);
  CompensatedSum x_faces, t_faces;
  for (int i = 0; i < scheme.s(); ++i) {
    const double w = scheme.time.b[i];
    x_faces.add(omega(u.phi_A_time[i], u.pi1_A[i], v.phi_A_time[i], v.pi1_A[i]), -w);
    x_faces.add(omega(u.phi_B_time[i], u.pi1_B[i], v.phi_B_time[i], v.pi1_B[i]), w);
  }
  for (int al = 0; al < scheme.sigma(); ++al) {
    const double w = scheme.space.b[al];
    t_faces.add(omega(u.phi_A_space[al], u.pi0_A[al], v.phi_A_space[al], v.pi0_A[al]), -w);
    t_faces.add(omega(u.phi_B_space[al], u.pi0_B[al], v.phi_B_space[al], v.pi0_B[al]), w);
  }
  CompensatedSum sum;
  sum.add(x_faces.total(), dt);
  sum.add(t_faces.total(), dx);
  return sum.value();
}

double msf_difference_form(const PrkScheme& scheme, double dt, double dx, const BoxFaces& u, const BoxFaces& v) {
  check_pair(scheme, u, v);
  const FaceFlux f = omega_flux(scheme, u, v);
  CompensatedSum sum;
  sum.add_quotient(f.t_faces, dt);
  sum.add_quotient(f.x_faces, dx);
  return sum.value();
}

double noether_residual(const PrkScheme& scheme, double dt, double dx, const BoxFaces& box, double xi) {
  box.check_shape(scheme.s(), scheme.sigma());
  double sum = 0.0;
  for (int i = 0; i < scheme.s(); ++i) sum += dt * scheme.time.b[i] * (box.pi1_B[i] - box.pi1_A[i]) * xi;
  for (int al = 0; al < scheme.sigma(); ++al)
    sum += dx * scheme.space.b[al] * (box.pi0_B[al] - box.pi0_A[al]) * xi;
  return sum;
}

double cartan_eval(unsigned faces, const PrkScheme& scheme, double dt, double dx, const BoxFaces& box,
                   const BoxFaces& variation) {
  check_pair(scheme, box, variation);
  double sum = 0.0;
  for (int i = 0; i < scheme.s(); ++i) {
    const double w = dt * scheme.time.b[i];
    if (faces & space_backward) sum += w * box.pi1_A[i] * variation.phi_A_time[i];
    if (faces & space_forward) sum += w * box.pi1_B[i] * variation.phi_B_time[i];
  }
  for (int al = 0; al < scheme.sigma(); ++al) {
    const double w = dx * scheme.space.b[al];
    if (faces & time_backward) sum += w * box.pi0_A[al] * variation.phi_A_space[al];
    if (faces & time_forward) sum += w * box.pi0_B[al] * variation.phi_B_space[al];
  }
  return sum;
}

double DdwResidual::max_abs() const {
  return std::max({std::abs(momentum), std::abs(phi_t), std::abs(phi_x)});
}

DdwResidual avg_ddw_residual(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                             const BoxRecord& box) {
  const int s = scheme.s(), sigma = scheme.sigma();
  const BoxData& d = box.data;
  d.check_shape(s, sigma);
  const InternalStages& st = box.stages;
  if (st.s != s || st.sigma != sigma) throw InvalidArgument("avg_ddw_residual: stage shape mismatch");

  double d0_pi0 = 0.0, d0_phi = 0.0;
  for (int al = 0; al < sigma; ++al) {
    d0_pi0 += scheme.space.b[al] * (d.pi0_B[al] - d.pi0_A[al]);
    d0_phi += scheme.space.b[al] * (d.phi_B_space[al] - d.phi_A_space[al]);
  }
  double d1_pi1 = 0.0, d1_phi = 0.0;
  for (int i = 0; i < s; ++i) {
    d1_pi1 += scheme.time.b[i] * (d.pi1_B[i] - d.pi1_A[i]);
    d1_phi += scheme.time.b[i] * (d.phi_B_time[i] - d.phi_A_time[i]);
  }
  Vec3 avg{0.0, 0.0, 0.0};
  for (int i = 0; i < s; ++i)
    for (int al = 0; al < sigma; ++al) {
      const std::size_t k = st.at(i, al);
      const Vec3 g = h.gradient({st.Phi[k], st.P0[k], st.P1[k]});
      const double w = scheme.time.b[i] * scheme.space.b[al];
      for (int c = 0; c < 3; ++c) avg[c] += w * g[c];
    }
  return {d0_pi0 / dt + d1_pi1 / dx + avg[0], d0_phi / dt - avg[1], d1_phi / dx - avg[2]};
}

DdwResidual preissman_residual(const HamiltonianModel& h, double dt, double dx, const BoxFaces& box) {
  box.check_shape(1, 1);
  const double phi = 0.25 * (box.phi_A_time[0] + box.phi_B_time[0] + box.phi_A_space[0] + box.phi_B_space[0]);
  const double p0 = 0.5 * (box.pi0_A[0] + box.pi0_B[0]);
  const double p1 = 0.5 * (box.pi1_A[0] + box.pi1_B[0]);
  const Vec3 g = h.gradient({phi, p0, p1});
  return {(box.pi0_B[0] - box.pi0_A[0]) / dt + (box.pi1_B[0] - box.pi1_A[0]) / dx + g[0],
          (box.phi_B_space[0] - box.phi_A_space[0]) / dt - g[1],
          (box.phi_B_time[0] - box.phi_A_time[0]) / dx - g[2]};
}

std::vector<DiagnosticRow> sweep(const HamiltonianModel& h, const Trajectory& traj, const BoundaryConditionSpec& bc,
                                 const SolverConfig& cfg, const SweepOptions& opts) {
  if (traj.boxes.empty() && traj.completed_slices() > 0)
    throw InvalidArgument("diagnostics sweep needs a trajectory marched with record_boxes");
  const GridSpec& g = traj.grid;
  const PrkScheme& sch = traj.scheme;
  const std::size_t n = static_cast<std::size_t>(g.n_x) * static_cast<std::size_t>(sch.sigma());
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto random_vec = [&] {
    std::vector<double> v(n);
    for (double& e : v) e = u(rng);
    return v;
  };

  std::vector<DiagnosticRow> rows;
  for (int a = 0; a < static_cast<int>(traj.boxes.size()); ++a) {
    std::vector<double> msf(static_cast<std::size_t>(g.n_x), 0.0);
    for (int p = 0; p < opts.tangent_pairs; ++p) {
      const auto dphi_u = random_vec(), dp0_u = random_vec(), dphi_v = random_vec(), dp0_v = random_vec();
      const auto tu = tangent_slice(h, traj, a, bc, dphi_u, dp0_u, cfg);
      const auto tv = tangent_slice(h, traj, a, bc, dphi_v, dp0_v, cfg);
      for (int b = 0; b < g.n_x; ++b)
        msf[b] = std::max(msf[b], std::abs(msf_residual(sch, g.dt, g.dx, tu[b], tv[b])));
    }
    for (int b = 0; b < g.n_x; ++b) {
      const BoxRecord& rec = traj.boxes[a][b];
      const DdwResidual ddw = avg_ddw_residual(h, sch, g.dt, g.dx, rec);
      rows.push_back({a, b, "msf", msf[b]});
      rows.push_back({a, b, "noether", noether_residual(sch, g.dt, g.dx, rec.data, opts.xi)});
      rows.push_back({a, b, "ddw_momentum", ddw.momentum});
      rows.push_back({a, b, "ddw_phi_t", ddw.phi_t});
      rows.push_back({a, b, "ddw_phi_x", ddw.phi_x});
    }
  }
  return rows;
}

}  // namespace msvi
