#include "msvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "msvi/kernels.hpp"
#include "msvi/linalg.hpp"

namespace msvi {

void SolverConfig::validate() const {
  if (!(newton_tol > 0.0)) throw InvalidArgument(fmt::format("solver: newton_tol must be > 0 (got {})", newton_tol));
  if (newton_max_iter < 1)
    throw InvalidArgument(fmt::format("solver: newton_max_iter must be >= 1 (got {})", newton_max_iter));
  if (!(fd_step > 0.0)) throw InvalidArgument(fmt::format("solver: fd_step must be > 0 (got {})", fd_step));
}

namespace {
std::string located(const std::string& what, int slice, int cell) {
  if (slice < 0 && cell < 0) return what;
  return fmt::format("{} (slice {}, cell {})", what, slice, cell);
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return x;
    m = std::max(m, std::abs(x));
  }
  return m;
}
}  // namespace

SolveError::SolveError(const std::string& what, int slice, int cell)
    : Error(located(what, slice, cell)), slice_(slice), cell_(cell) {}

NewtonDivergence::NewtonDivergence(double residual, int iterations, int slice, int cell)
    : SolveError(fmt::format("Newton iteration did not converge: residual {:.3e} after {} iterations", residual,
                             iterations),
                 slice, cell),
      residual_(residual) {}

SingularJacobian::SingularJacobian(int slice, int cell) : SolveError("singular Newton Jacobian", slice, cell) {}

BoxSolution solve_box_forward(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx,
                              const BoxFaces& box, const SolverConfig& cfg, const InternalStages* guess) {
  cfg.validate();
  scheme.require_invertible();
  const BoxSystem sys(h, scheme, dt, dx, cfg.jacobian_mode, cfg.fd_step);
  std::vector<double> z(static_cast<std::size_t>(sys.n_vars()), 0.0);
  sys.load_backward_faces(box, z);
  if (guess) sys.load_stages(*guess, z);

  const int m = sys.n_stage();
  std::vector<double> r(static_cast<std::size_t>(m));
  BoxSolution sol;
  for (int it = 0;; ++it) {
    sys.residual(z, r);
    const double norm = max_abs(r);
    sol.iterations = it;
    sol.residual = norm;
    if (!std::isfinite(norm)) throw NewtonDivergence(norm, it);
    if (norm <= cfg.newton_tol) break;
    if (it == cfg.newton_max_iter) throw NewtonDivergence(norm, it);
    const Matrix j = sys.jacobian(z);
    Matrix jss(static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    for (int row = 0; row < m; ++row)
      for (int c = 0; c < m; ++c) jss(row, c) = j(row, c);
    const DenseLU lu(jss);
    if (lu.singular()) throw SingularJacobian();
    lu.solve(r);
    for (int c = 0; c < m; ++c) z[c] -= r[c];
  }
  sol.record.data = BoxData::zeros(sys.s(), sys.sigma());
  static_cast<BoxFaces&>(sol.record.data) = box;
  std::vector<double> out(static_cast<std::size_t>(sys.n_out()));
  sys.outputs(z, out);
  sys.store_forward_faces(out, sol.record.data);
  sol.record.stages = sys.stages(z);
  return sol;
}

namespace {

// Global unknowns of one slice: the free half of edge 0, then for each box
// its 4n stage unknowns followed by the next edge (phi and pi1 for interior
// edges, the free half for the last edge). Rows of box b: 4n stage
// equations, then phi_R and pi1_R continuity with edge b+1.
int first_nonfinite(const std::vector<double>& u, const std::vector<double>& v) {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (!std::isfinite(u[k]) || !std::isfinite(v[k])) return static_cast<int>(k);
  return -1;
}

class SliceSystem {
 public:
  SliceSystem(const BoxSystem& box, int n_boxes, const BoundaryConditionSpec& bc)
      : box_(box), m_(n_boxes), s_(box.s()), sigma_(box.sigma()), ns_(box.n_stage()),
        block_(ns_ + 2 * s_), left_(bc.left.kind), right_(bc.right.kind) {}

  int size() const { return m_ * block_; }
  int stage_col(int b) const { return s_ + b * block_; }
  int row(int b) const { return b * block_; }

  int col_phi(int e, int i) const {
    if (e == 0) return left_ == BcKind::neumann ? i : -1;
    if (e == m_) return right_ == BcKind::neumann ? stage_col(m_ - 1) + ns_ + i : -1;
    return stage_col(e - 1) + ns_ + i;
  }
  int col_pi1(int e, int i) const {
    if (e == 0) return left_ == BcKind::dirichlet ? i : -1;
    if (e == m_) return right_ == BcKind::dirichlet ? stage_col(m_ - 1) + ns_ + i : -1;
    return stage_col(e - 1) + ns_ + s_ + i;
  }

  // Prescribed values at the two walls for this slice: [left s][right s].
  struct Walls {
    std::vector<double> left, right;
  };

  double edge_phi(std::span<const double> x, const Walls& w, int e, int i) const {
    const int c = col_phi(e, i);
    return c >= 0 ? x[c] : (e == 0 ? w.left[i] : w.right[i]);
  }
  double edge_pi1(std::span<const double> x, const Walls& w, int e, int i) const {
    const int c = col_pi1(e, i);
    return c >= 0 ? x[c] : (e == 0 ? w.left[i] : w.right[i]);
  }

  void gather(int b, std::span<const double> x, const Walls& w, std::span<const double> lphi,
              std::span<const double> lp0, std::span<double> z, std::vector<int>& cols) const {
    cols.assign(static_cast<std::size_t>(box_.n_vars()), -1);
    for (int c = 0; c < ns_; ++c) {
      z[c] = x[stage_col(b) + c];
      cols[c] = stage_col(b) + c;
    }
    for (int i = 0; i < s_; ++i) {
      z[box_.col_phiL(i)] = edge_phi(x, w, b, i);
      z[box_.col_pi1L(i)] = edge_pi1(x, w, b, i);
      cols[box_.col_phiL(i)] = col_phi(b, i);
      cols[box_.col_pi1L(i)] = col_pi1(b, i);
    }
    for (int al = 0; al < sigma_; ++al) {
      z[box_.col_phi0(al)] = lphi[b * sigma_ + al];
      z[box_.col_pi00(al)] = lp0[b * sigma_ + al];
    }
  }

  // F(x) and, when `jac` is non-null, its Jacobian as triplets.
  void assemble(std::span<const double> x, const Walls& w, std::span<const double> lphi,
                std::span<const double> lp0, std::span<double> f, std::vector<Triplet>* jac) const {
    std::vector<double> z(static_cast<std::size_t>(box_.n_vars())), r(static_cast<std::size_t>(ns_)), out(static_cast<std::size_t>(box_.n_out()));
    std::vector<int> cols;
    if (jac) jac->clear();
    const Matrix& e = box_.output_map();
    for (int b = 0; b < m_; ++b) {
      gather(b, x, w, lphi, lp0, z, cols);
      box_.residual(z, r);
      box_.outputs(z, out);
      const int r0 = row(b);
      for (int k = 0; k < ns_; ++k) f[r0 + k] = r[k];
      for (int i = 0; i < s_; ++i) {
        f[r0 + ns_ + i] = out[box_.out_phiR(i)] - edge_phi(x, w, b + 1, i);
        f[r0 + ns_ + s_ + i] = out[box_.out_pi1R(i)] - edge_pi1(x, w, b + 1, i);
      }
      if (!jac) continue;
      const Matrix j = box_.jacobian(z);
      for (int k = 0; k < ns_; ++k)
        for (int c = 0; c < box_.n_vars(); ++c)
          if (cols[c] >= 0 && j(k, c) != 0.0) jac->push_back({r0 + k, cols[c], j(k, c)});
      for (int i = 0; i < s_; ++i) {
        const int rp = r0 + ns_ + i, rq = r0 + ns_ + s_ + i;
        for (int c = 0; c < box_.n_vars(); ++c) {
          if (cols[c] < 0) continue;
          if (e(box_.out_phiR(i), c) != 0.0) jac->push_back({rp, cols[c], e(box_.out_phiR(i), c)});
          if (e(box_.out_pi1R(i), c) != 0.0) jac->push_back({rq, cols[c], e(box_.out_pi1R(i), c)});
        }
        if (col_phi(b + 1, i) >= 0) jac->push_back({rp, col_phi(b + 1, i), -1.0});
        if (col_pi1(b + 1, i) >= 0) jac->push_back({rq, col_pi1(b + 1, i), -1.0});
      }
    }
  }

  int cell_of_row(int r) const { return std::clamp(r / block_, 0, m_ - 1); }
  int cell_of_col(int c) const { return std::clamp((c - s_) / block_, 0, m_ - 1); }

  BoxRecord record(int b, std::span<const double> x, const Walls& w, std::span<const double> lphi,
                   std::span<const double> lp0) const {
    std::vector<double> z(static_cast<std::size_t>(box_.n_vars())), out(static_cast<std::size_t>(box_.n_out()));
    std::vector<int> cols;
    gather(b, x, w, lphi, lp0, z, cols);
    BoxRecord rec;
    rec.data = BoxData::zeros(s_, sigma_);
    box_.outputs(z, out);
    for (int i = 0; i < s_; ++i) {
      rec.data.phi_A_time[i] = z[box_.col_phiL(i)];
      rec.data.pi1_A[i] = z[box_.col_pi1L(i)];
    }
    for (int al = 0; al < sigma_; ++al) {
      rec.data.phi_A_space[al] = z[box_.col_phi0(al)];
      rec.data.pi0_A[al] = z[box_.col_pi00(al)];
    }
    box_.store_forward_faces(out, rec.data);
    rec.stages = box_.stages(z);
    return rec;
  }

 private:
  const BoxSystem& box_;
  int m_, s_, sigma_, ns_, block_;
  BcKind left_, right_;
};

SliceSystem::Walls walls_at(const BoundaryConditionSpec& bc, const PrkScheme& scheme, double t, double dt) {
  SliceSystem::Walls w;
  for (double c : scheme.time.c) {
    w.left.push_back(bc.left.at(t + c * dt));
    w.right.push_back(bc.right.at(t + c * dt));
  }
  return w;
}

// Stage and edge unknowns as they appear in a recorded slice.
std::vector<double> unknowns_from_records(const SliceSystem& sys, const BoxSystem& box,
                                          const std::vector<BoxRecord>& recs) {
  std::vector<double> x(static_cast<std::size_t>(sys.size()), 0.0);
  const int m = static_cast<int>(recs.size());
  for (int b = 0; b < m; ++b) {
    std::vector<double> z(static_cast<std::size_t>(box.n_vars()), 0.0);
    box.load_stages(recs[b].stages, z);
    for (int c = 0; c < box.n_stage(); ++c) x[sys.stage_col(b) + c] = z[c];
    for (int i = 0; i < box.s(); ++i) {
      if (sys.col_phi(b, i) >= 0) x[sys.col_phi(b, i)] = recs[b].data.phi_A_time[i];
      if (sys.col_pi1(b, i) >= 0) x[sys.col_pi1(b, i)] = recs[b].data.pi1_A[i];
      if (sys.col_phi(b + 1, i) >= 0) x[sys.col_phi(b + 1, i)] = recs[b].data.phi_B_time[i];
      if (sys.col_pi1(b + 1, i) >= 0) x[sys.col_pi1(b + 1, i)] = recs[b].data.pi1_B[i];
    }
  }
  return x;
}

}  // namespace

BoxData Trajectory::box(int a, int b) const {
  if (a < 0 || a >= completed_slices() || b < 0 || b >= grid.n_x)
    throw InvalidArgument(fmt::format("trajectory: no box ({}, {})", a, b));
  const int s = scheme.s(), sigma = scheme.sigma();
  BoxData d = BoxData::zeros(s, sigma);
  for (int i = 0; i < s; ++i) {
    d.phi_A_time[i] = edge_phi[a][b * s + i];
    d.pi1_A[i] = edge_p1[a][b * s + i];
    d.phi_B_time[i] = edge_phi[a][(b + 1) * s + i];
    d.pi1_B[i] = edge_p1[a][(b + 1) * s + i];
  }
  for (int al = 0; al < sigma; ++al) {
    d.phi_A_space[al] = level_phi[a][b * sigma + al];
    d.pi0_A[al] = level_p0[a][b * sigma + al];
    d.phi_B_space[al] = level_phi[a + 1][b * sigma + al];
    d.pi0_B[al] = level_p0[a + 1][b * sigma + al];
  }
  return d;
}

bool Trajectory::has_node_layout() const {
  return scheme.s() == 1 && scheme.sigma() == 1 && scheme.time.c[0] == 1.0 && scheme.space.c[0] == 1.0;
}

FieldState Trajectory::nodes() const {
  if (!has_node_layout())
    throw InvalidArgument("trajectory: node layout needs one stage per direction with nodes at 1");
  GridSpec g = grid;
  g.n_t = completed_slices();
  if (g.n_t < 1) g.n_t = 1;
  FieldState st = FieldState::zeros(g);
  const int m = grid.n_x;
  const int levels = completed_slices() + 1;
  for (int b = 0; b <= m; ++b) {
    st.phi(0, b) = initial_phi[b];
    st.p0(0, b) = initial_p0[b];
  }
  for (int b = 0; b < m; ++b) st.p1(0, b) = -(initial_phi[b + 1] - initial_phi[b]) / grid.dx;
  st.p1(0, m) = m > 0 ? st.p1(0, m - 1) : 0.0;
  for (int a = 1; a < levels; ++a) {
    st.phi(a, 0) = edge_phi[a - 1][0];
    for (int b = 0; b < m; ++b) {
      st.phi(a, b + 1) = level_phi[a][b];
      st.p0(a, b + 1) = level_p0[a][b];
    }
    st.p0(a, 0) = st.p0(a, 1);
    for (int b = 0; b <= m; ++b) st.p1(a, b) = edge_p1[a - 1][b];
  }
  return st;
}

Trajectory march(const HamiltonianModel& h, const PrkScheme& scheme, const GridSpec& grid,
                 const InitialData& initial, const BoundaryConditionSpec& bc, const SolverConfig& cfg,
                 const MarchOptions& opts) {
  grid.validate();
  cfg.validate();
  if (!initial.phi || !initial.p0) throw InvalidArgument("march: initial phi and p0 are required");
  const BoxSystem box(h, scheme, grid.dt, grid.dx, cfg.jacobian_mode, cfg.fd_step);
  const SliceSystem sys(box, grid.n_x, bc);
  const int m = grid.n_x, s = scheme.s(), sigma = scheme.sigma();

  Trajectory tr;
  tr.grid = grid;
  tr.scheme = scheme;
  std::vector<double> lphi(static_cast<std::size_t>(m) * sigma), lp0(lphi.size());
  for (int b = 0; b < m; ++b)
    for (int al = 0; al < sigma; ++al) {
      const double x = grid.x(b) + scheme.space.c[al] * grid.dx;
      lphi[b * sigma + al] = initial.phi(x);
      lp0[b * sigma + al] = initial.p0(x);
    }
  for (int b = 0; b <= m; ++b) {
    tr.initial_phi.push_back(initial.phi(grid.x(b)));
    tr.initial_p0.push_back(initial.p0(grid.x(b)));
  }
  tr.level_phi.push_back(lphi);
  tr.level_p0.push_back(lp0);

  std::vector<double> x(static_cast<std::size_t>(sys.size()), 0.0);
  for (int e = 0; e <= m; ++e)
    for (int i = 0; i < s; ++i)
      if (sys.col_phi(e, i) >= 0) x[sys.col_phi(e, i)] = lphi[std::min(e, m - 1) * sigma];

  std::vector<double> f(x.size());
  std::vector<Triplet> trip;
  for (int a = 0; a < grid.n_t; ++a) {
    const auto walls = walls_at(bc, scheme, grid.t(a), grid.dt);
    bool converged = false, diverged = false;
    for (int it = 0; it <= cfg.newton_max_iter; ++it) {
      sys.assemble(x, walls, lphi, lp0, f, &trip);
      const double norm = max_abs(f);
      if (!std::isfinite(norm)) {
        const auto bad = std::find_if(f.begin(), f.end(), [](double v) { return !std::isfinite(v); });
        tr.failed_cell = sys.cell_of_row(static_cast<int>(bad - f.begin()));
        diverged = true;
        break;
      }
      if (norm <= cfg.newton_tol) {
        converged = true;
        break;
      }
      if (it == cfg.newton_max_iter) {
        const auto worst = std::max_element(f.begin(), f.end(), [](double p, double q) {
          return std::abs(p) < std::abs(q);
        });
        throw NewtonDivergence(norm, it, a, sys.cell_of_row(static_cast<int>(worst - f.begin())));
      }
      const BandedLU lu(sys.size(), trip);
      if (lu.singular()) throw SingularJacobian(a, sys.cell_of_col(lu.failed_pivot()));
      lu.solve(f);
      for (std::size_t c = 0; c < x.size(); ++c) x[c] -= f[c];
    }
    if (diverged || !converged) {
      tr.outcome = Outcome::diverged;
      tr.failed_slice = a;
      break;
    }

    std::vector<BoxRecord> recs;
    std::vector<double> nphi(lphi.size()), np0(lp0.size()), ephi(static_cast<std::size_t>(m + 1) * s), ep1(ephi.size());
    for (int b = 0; b < m; ++b) {
      BoxRecord rec = sys.record(b, x, walls, lphi, lp0);
      for (int al = 0; al < sigma; ++al) {
        nphi[b * sigma + al] = rec.data.phi_B_space[al];
        np0[b * sigma + al] = rec.data.pi0_B[al];
      }
      for (int i = 0; i < s; ++i) {
        ephi[b * s + i] = rec.data.phi_A_time[i];
        ep1[b * s + i] = rec.data.pi1_A[i];
        ephi[(b + 1) * s + i] = rec.data.phi_B_time[i];
        ep1[(b + 1) * s + i] = rec.data.pi1_B[i];
      }
      if (opts.record_boxes) recs.push_back(std::move(rec));
    }
    // The right wall's prescribed half is a boundary value, not an output.
    for (int i = 0; i < s; ++i) {
      ephi[m * s + i] = sys.edge_phi(x, walls, m, i);
      ep1[m * s + i] = sys.edge_pi1(x, walls, m, i);
    }
    const auto scan_phi = kernels::active().scan(nphi.data(), nphi.size());
    const auto scan_p0 = kernels::active().scan(np0.data(), np0.size());
    if (!scan_phi.finite || !scan_p0.finite) {
      tr.outcome = Outcome::diverged;
      tr.failed_slice = a;
      tr.failed_cell = first_nonfinite(nphi, np0) / sigma;
      break;
    }
    lphi = std::move(nphi);
    lp0 = std::move(np0);
    tr.level_phi.push_back(lphi);
    tr.level_p0.push_back(lp0);
    tr.edge_phi.push_back(std::move(ephi));
    tr.edge_p1.push_back(std::move(ep1));
    if (opts.record_boxes) tr.boxes.push_back(std::move(recs));
  }
  return tr;
}

std::vector<BoxTangent> tangent_slice(const HamiltonianModel& h, const Trajectory& traj, int a,
                                      const BoundaryConditionSpec& bc, std::span<const double> dphi,
                                      std::span<const double> dp0, const SolverConfig& cfg) {
  if (a < 0 || a >= static_cast<int>(traj.boxes.size()))
    throw InvalidArgument(fmt::format("tangent_slice: slice {} has no recorded boxes", a));
  const GridSpec& g = traj.grid;
  const BoxSystem box(h, traj.scheme, g.dt, g.dx, cfg.jacobian_mode, cfg.fd_step);
  const SliceSystem sys(box, g.n_x, bc);
  const int m = g.n_x, s = box.s(), sigma = box.sigma();
  if (static_cast<int>(dphi.size()) != m * sigma || static_cast<int>(dp0.size()) != m * sigma)
    throw InvalidArgument("tangent_slice: variation length must be n_x * sigma");

  const auto walls = walls_at(bc, traj.scheme, g.t(a), g.dt);
  const std::vector<double> x = unknowns_from_records(sys, box, traj.boxes[a]);
  std::vector<double> f(x.size());
  std::vector<Triplet> trip;
  sys.assemble(x, walls, traj.level_phi[a], traj.level_p0[a], f, &trip);
  const BandedLU lu(sys.size(), trip);
  if (lu.singular()) throw SingularJacobian(a, sys.cell_of_col(lu.failed_pivot()));

  // Right-hand side: minus the data columns of each box applied to (dphi, dp0).
  std::vector<double> rhs(x.size(), 0.0), z(static_cast<std::size_t>(box.n_vars())), dz(z.size());
  std::vector<int> cols;
  const Matrix& e = box.output_map();
  for (int b = 0; b < m; ++b) {
    sys.gather(b, x, walls, traj.level_phi[a], traj.level_p0[a], z, cols);
    const Matrix j = box.jacobian(z);
    std::fill(dz.begin(), dz.end(), 0.0);
    for (int al = 0; al < sigma; ++al) {
      dz[box.col_phi0(al)] = dphi[b * sigma + al];
      dz[box.col_pi00(al)] = dp0[b * sigma + al];
    }
    const int r0 = sys.row(b);
    for (int k = 0; k < box.n_stage(); ++k)
      for (int c = 0; c < box.n_vars(); ++c)
        if (cols[c] < 0) rhs[r0 + k] -= j(k, c) * dz[c];
    for (int i = 0; i < s; ++i)
      for (int c = 0; c < box.n_vars(); ++c)
        if (cols[c] < 0) {
          rhs[r0 + box.n_stage() + i] -= e(box.out_phiR(i), c) * dz[c];
          rhs[r0 + box.n_stage() + s + i] -= e(box.out_pi1R(i), c) * dz[c];
        }
  }
  lu.solve(rhs);

  const SliceSystem::Walls zero_walls{std::vector<double>(static_cast<std::size_t>(s), 0.0),
                                      std::vector<double>(static_cast<std::size_t>(s), 0.0)};
  std::vector<BoxTangent> out;
  std::vector<double> dout(static_cast<std::size_t>(box.n_out()));
  for (int b = 0; b < m; ++b) {
    sys.gather(b, rhs, zero_walls, dphi, dp0, dz, cols);
    BoxTangent t = BoxTangent::zeros(s, sigma);
    for (int i = 0; i < s; ++i) {
      t.phi_A_time[i] = dz[box.col_phiL(i)];
      t.pi1_A[i] = dz[box.col_pi1L(i)];
    }
    for (int al = 0; al < sigma; ++al) {
      t.phi_A_space[al] = dz[box.col_phi0(al)];
      t.pi0_A[al] = dz[box.col_pi00(al)];
    }
    box.outputs(dz, dout);
    box.store_forward_faces(dout, t);
    out.push_back(std::move(t));
  }
  return out;
}

// Explicit path.

namespace {

void check_slice(const Slice& in) {
  if (in.phi.size() < 2 || in.p0.size() != in.phi.size())
    throw InvalidArgument("explicit step: slice needs at least two nodes and matching phi/p0");
}

// phi extended by one ghost node on each side, closed at time t.
std::vector<double> with_ghosts(const std::vector<double>& phi, double t, double dx, const BoundaryConditionSpec& bc) {
  const std::size_t m = phi.size() - 1;
  std::vector<double> s(m + 3);
  std::copy(phi.begin(), phi.end(), s.begin() + 1);
  const double pl = bc.left.kind == BcKind::neumann ? bc.left.at(t) : 0.0;
  const double pr = bc.right.kind == BcKind::neumann ? bc.right.at(t) : 0.0;
  s[0] = phi[1] + 2.0 * dx * pl;
  s[m + 2] = phi[m - 1] - 2.0 * dx * pr;
  return s;
}

Slice explicit_step(const Slice& in, double t_new, double dt, double dx, const dsl::ScalarFunction& dV,
                    const BoundaryConditionSpec& bc, bool new_level) {
  check_slice(in);
  const auto& k = kernels::active();
  const std::size_t n = in.phi.size();
  Slice out;
  out.phi.resize(n);
  out.p0.resize(n);
  k.axpy(in.phi.data(), dt, in.p0.data(), out.phi.data(), n);
  if (bc.left.kind == BcKind::dirichlet) out.phi[0] = bc.left.at(t_new);
  if (bc.right.kind == BcKind::dirichlet) out.phi[n - 1] = bc.right.at(t_new);

  const std::vector<double>& src = new_level ? out.phi : in.phi;
  const double t_src = new_level ? t_new : t_new - dt;
  std::vector<double> force(n);
  for (std::size_t b = 0; b < n; ++b) force[b] = dV(src[b]);
  const std::vector<double> s = with_ghosts(src, t_src, dx, bc);
  k.wave_update(in.p0.data(), s.data() + 1, force.data(), dt, dx * dx, out.p0.data(), n);

  if (bc.left.kind == BcKind::dirichlet) out.p0[0] = (bc.left.at(t_new + dt) - out.phi[0]) / dt;
  if (bc.right.kind == BcKind::dirichlet) out.p0[n - 1] = (bc.right.at(t_new + dt) - out.phi[n - 1]) / dt;
  return out;
}

}  // namespace

Slice explicit_mse_step(const Slice& in, double t_new, double dt, double dx, const dsl::ScalarFunction& dV,
                        const BoundaryConditionSpec& bc) {
  return explicit_step(in, t_new, dt, dx, dV, bc, true);
}

Slice explicit_fe_step(const Slice& in, double t_new, double dt, double dx, const dsl::ScalarFunction& dV,
                       const BoundaryConditionSpec& bc) {
  return explicit_step(in, t_new, dt, dx, dV, bc, false);
}

FieldState ExplicitTrajectory::field_state(const BoundaryConditionSpec& bc) const {
  GridSpec g = grid;
  g.n_t = std::max(levels - 1, 1);
  FieldState st = FieldState::zeros(g);
  const int m = grid.n_x;
  for (int a = 0; a < levels; ++a) {
    for (int b = 0; b <= m; ++b) {
      st.phi(a, b) = phi(a, b);
      st.p0(a, b) = p0(a, b);
    }
    for (int b = 0; b < m; ++b) st.p1(a, b) = -(phi(a, b + 1) - phi(a, b)) / grid.dx;
    st.p1(a, m) = bc.right.kind == BcKind::neumann ? bc.right.at(grid.t(a)) : st.p1(a, m - 1);
  }
  return st;
}

ExplicitTrajectory explicit_march(ExplicitMethod method, const GridSpec& grid, const InitialData& initial,
                                  const dsl::ScalarFunction& dV, const BoundaryConditionSpec& bc) {
  grid.validate();
  if (!initial.phi || !initial.p0) throw InvalidArgument("explicit march: initial phi and p0 are required");
  ExplicitTrajectory tr;
  tr.grid = grid;
  tr.phi = NodeArray(grid.n_t + 1, grid.n_x + 1);
  tr.p0 = NodeArray(grid.n_t + 1, grid.n_x + 1);
  Slice cur;
  for (int b = 0; b <= grid.n_x; ++b) {
    cur.phi.push_back(initial.phi(grid.x(b)));
    cur.p0.push_back(initial.p0(grid.x(b)));
  }
  const auto& k = kernels::active();
  auto store = [&](int a, const Slice& sl) {
    std::copy(sl.phi.begin(), sl.phi.end(), tr.phi.level(a).begin());
    std::copy(sl.p0.begin(), sl.p0.end(), tr.p0.level(a).begin());
    tr.levels = a + 1;
  };
  const auto first = k.scan(cur.phi.data(), cur.phi.size());
  if (!first.finite || !k.scan(cur.p0.data(), cur.p0.size()).finite)
    throw InvalidArgument("explicit march: initial data is not finite");
  tr.max_abs_phi = first.max_abs;
  store(0, cur);
  for (int a = 0; a < grid.n_t; ++a) {
    const double t_new = grid.t(a + 1);
    cur = method == ExplicitMethod::mse ? explicit_mse_step(cur, t_new, grid.dt, grid.dx, dV, bc)
                                        : explicit_fe_step(cur, t_new, grid.dt, grid.dx, dV, bc);
    const auto sp = k.scan(cur.phi.data(), cur.phi.size());
    const auto sq = k.scan(cur.p0.data(), cur.p0.size());
    if (!sp.finite || !sq.finite) {
      tr.outcome = Outcome::diverged;
      tr.failed_slice = a;
      tr.failed_cell = first_nonfinite(cur.phi, cur.p0);
      break;
    }
    tr.max_abs_phi = std::max(tr.max_abs_phi, sp.max_abs);
    store(a + 1, cur);
  }
  return tr;
}

}  // namespace msvi
