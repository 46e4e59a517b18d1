#include "msvi/box_system.hpp"

#include <fmt/format.h>

namespace msvi {

BoxSystem::BoxSystem(const HamiltonianModel& h, const PrkScheme& scheme, double dt, double dx, JacobianMode mode,
                     double fd_step)
    : h_(h), scheme_(scheme), dt_(dt), dx_(dx), mode_(mode), fd_step_(fd_step),
      s_(scheme.s()), sigma_(scheme.sigma()), n_(s_ * sigma_) {
  if (!(dt > 0.0) || !(dx > 0.0)) throw InvalidArgument(fmt::format("box: dt and dx must be > 0 (got {}, {})", dt, dx));
  if (!h_.has_hessian()) mode_ = JacobianMode::finite_difference;
  const Matrix& a = scheme_.time.a;
  const Matrix& a2 = scheme_.time_conjugate;
  const Matrix& at2 = scheme_.space_conjugate;

  dphi_.resize(n_);
  dp0_.resize(n_);
  dp1_.resize(n_);
  for (int i = 0; i < s_; ++i) {
    for (int al = 0; al < sigma_; ++al) {
      const int k = i * sigma_ + al;
      for (int j = 0; j < s_; ++j) {
        if (a(i, j) != 0.0) dphi_[k].push_back({col_V(j * sigma_ + al), dt_ * a(i, j)});
        if (a2(i, j) != 0.0) dp0_[k].push_back({col_X(j * sigma_ + al), dt_ * a2(i, j)});
      }
      dphi_[k].push_back({col_phi0(al), 1.0});
      dp0_[k].push_back({col_pi00(al), 1.0});
      for (int be = 0; be < sigma_; ++be)
        if (at2(al, be) != 0.0) dp1_[k].push_back({col_Y(i * sigma_ + be), dx_ * at2(al, be)});
      dp1_[k].push_back({col_pi1L(i), 1.0});
    }
  }

  out_map_ = Matrix(static_cast<std::size_t>(n_out()), static_cast<std::size_t>(n_vars()));
  const auto& b = scheme_.time.b;
  const auto& bt = scheme_.space.b;
  for (int al = 0; al < sigma_; ++al) {
    out_map_(out_phi1(al), col_phi0(al)) = 1.0;
    out_map_(out_pi01(al), col_pi00(al)) = 1.0;
    for (int j = 0; j < s_; ++j) {
      out_map_(out_phi1(al), col_V(j * sigma_ + al)) = dt_ * b[j];
      out_map_(out_pi01(al), col_X(j * sigma_ + al)) = dt_ * b[j];
    }
  }
  for (int i = 0; i < s_; ++i) {
    out_map_(out_phiR(i), col_phiL(i)) = 1.0;
    out_map_(out_pi1R(i), col_pi1L(i)) = 1.0;
    for (int be = 0; be < sigma_; ++be) {
      out_map_(out_phiR(i), col_W(i * sigma_ + be)) = dx_ * bt[be];
      out_map_(out_pi1R(i), col_Y(i * sigma_ + be)) = dx_ * bt[be];
    }
  }
}

void BoxSystem::expand(std::span<const double> z, std::vector<double>& phi, std::vector<double>& p0,
                       std::vector<double>& p1) const {
  auto apply = [&](const std::vector<std::vector<Term>>& rows, std::vector<double>& v) {
    v.assign(static_cast<std::size_t>(n_), 0.0);
    for (int k = 0; k < n_; ++k)
      for (const Term& t : rows[k]) v[k] += t.coef * z[t.col];
  };
  apply(dphi_, phi);
  apply(dp0_, p0);
  apply(dp1_, p1);
}

void BoxSystem::residual(std::span<const double> z, std::span<double> r) const {
  std::vector<double> phi, p0, p1;
  expand(z, phi, p0, p1);
  const Matrix& at = scheme_.space.a;
  for (int i = 0; i < s_; ++i) {
    for (int al = 0; al < sigma_; ++al) {
      const int k = i * sigma_ + al;
      const Vec3 g = h_.gradient({phi[k], p0[k], p1[k]});
      r[k] = z[col_V(k)] - g[1];
      r[n_ + k] = z[col_W(k)] - g[2];
      r[2 * n_ + k] = z[col_X(k)] + z[col_Y(k)] + g[0];
      double single = phi[k] - z[col_phiL(i)];
      for (int be = 0; be < sigma_; ++be) single -= dx_ * at(al, be) * z[col_W(i * sigma_ + be)];
      r[3 * n_ + k] = single;
    }
  }
}

Mat3 BoxSystem::second_derivatives(const FibrePoint& p) const {
  if (mode_ == JacobianMode::symbolic_hessian) return h_.hessian(p);
  Mat3 hs{};
  for (int c = 0; c < 3; ++c) {
    FibrePoint up = p, dn = p;
    double* u = c == 0 ? &up.phi : c == 1 ? &up.p0 : &up.p1;
    double* d = c == 0 ? &dn.phi : c == 1 ? &dn.p0 : &dn.p1;
    *u += fd_step_;
    *d -= fd_step_;
    const Vec3 gu = h_.gradient(up), gd = h_.gradient(dn);
    for (int r = 0; r < 3; ++r) hs[r][c] = (gu[r] - gd[r]) / (2.0 * fd_step_);
  }
  return hs;
}

Matrix BoxSystem::jacobian(std::span<const double> z) const {
  std::vector<double> phi, p0, p1;
  expand(z, phi, p0, p1);
  Matrix j(static_cast<std::size_t>(n_stage()), static_cast<std::size_t>(n_vars()));
  const Matrix& at = scheme_.space.a;
  for (int i = 0; i < s_; ++i) {
    for (int al = 0; al < sigma_; ++al) {
      const int k = i * sigma_ + al;
      const Mat3 hs = second_derivatives({phi[k], p0[k], p1[k]});
      // row of residual `row` gets sign * d(H_c)/dz through the stage expansions
      auto chain = [&](int row, int c, double sign) {
        for (const Term& t : dphi_[k]) j(row, t.col) += sign * hs[c][0] * t.coef;
        for (const Term& t : dp0_[k]) j(row, t.col) += sign * hs[c][1] * t.coef;
        for (const Term& t : dp1_[k]) j(row, t.col) += sign * hs[c][2] * t.coef;
      };
      j(k, col_V(k)) += 1.0;
      chain(k, 1, -1.0);
      j(n_ + k, col_W(k)) += 1.0;
      chain(n_ + k, 2, -1.0);
      j(2 * n_ + k, col_X(k)) += 1.0;
      j(2 * n_ + k, col_Y(k)) += 1.0;
      chain(2 * n_ + k, 0, 1.0);
      const int rs = 3 * n_ + k;
      for (const Term& t : dphi_[k]) j(rs, t.col) += t.coef;
      j(rs, col_phiL(i)) -= 1.0;
      for (int be = 0; be < sigma_; ++be) j(rs, col_W(i * sigma_ + be)) -= dx_ * at(al, be);
    }
  }
  return j;
}

void BoxSystem::outputs(std::span<const double> z, std::span<double> out) const {
  for (int r = 0; r < n_out(); ++r) {
    double v = 0.0;
    for (int c = 0; c < n_vars(); ++c)
      if (out_map_(r, c) != 0.0) v += out_map_(r, c) * z[c];
    out[r] = v;
  }
}

InternalStages BoxSystem::stages(std::span<const double> z) const {
  InternalStages st = InternalStages::zeros(s_, sigma_);
  expand(z, st.Phi, st.P0, st.P1);
  for (int k = 0; k < n_; ++k) {
    st.V[k] = z[col_V(k)];
    st.W[k] = z[col_W(k)];
    st.X[k] = z[col_X(k)];
    st.Y[k] = z[col_Y(k)];
  }
  return st;
}

void BoxSystem::load_backward_faces(const BoxFaces& f, std::span<double> z) const {
  f.check_shape(s_, sigma_);
  for (int i = 0; i < s_; ++i) {
    z[col_phiL(i)] = f.phi_A_time[i];
    z[col_pi1L(i)] = f.pi1_A[i];
  }
  for (int al = 0; al < sigma_; ++al) {
    z[col_phi0(al)] = f.phi_A_space[al];
    z[col_pi00(al)] = f.pi0_A[al];
  }
}

void BoxSystem::load_stages(const InternalStages& st, std::span<double> z) const {
  for (int k = 0; k < n_; ++k) {
    z[col_V(k)] = st.V[k];
    z[col_W(k)] = st.W[k];
    z[col_X(k)] = st.X[k];
    z[col_Y(k)] = st.Y[k];
  }
}

void BoxSystem::store_forward_faces(std::span<const double> out, BoxFaces& f) const {
  f.phi_B_space.resize(sigma_);
  f.pi0_B.resize(sigma_);
  f.phi_B_time.resize(s_);
  f.pi1_B.resize(s_);
  for (int al = 0; al < sigma_; ++al) {
    f.phi_B_space[al] = out[out_phi1(al)];
    f.pi0_B[al] = out[out_pi01(al)];
  }
  for (int i = 0; i < s_; ++i) {
    f.phi_B_time[i] = out[out_phiR(i)];
    f.pi1_B[i] = out[out_pi1R(i)];
  }
}

}  // namespace msvi
