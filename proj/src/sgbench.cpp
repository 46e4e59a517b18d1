#include "msvi/sgbench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "msvi/hamdsl.hpp"
#include "msvi/kernels.hpp"

namespace msvi::sgbench {

namespace {

constexpr int kCurveSamples = 10001;

void check_velocity(double v) {
  if (!(v > 0.0 && v < 1.0)) throw InvalidArgument(fmt::format("soliton velocity must lie in (0, 1), got {}", v));
}

InitialData soliton_data(double v) {
  return {[v](double x) { return soliton(v, 0.0, x).phi; }, [v](double x) { return soliton(v, 0.0, x).p0; }};
}

struct Series {
  std::vector<double> x, y;
};

struct Curve {
  std::vector<double> x, y;
};

// Scatter plot in a fixed 800x600 viewport with the exact curves on top.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const Series& pts, const std::vector<Curve>& curves) {
  constexpr double W = 800, H = 600, ml = 70, mr = 20, mt = 40, mb = 60;
  double x0 = 0, x1 = 2 * M_PI, y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  auto widen = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x), x1 = std::max(x1, x);
    y0 = std::min(y0, y), y1 = std::max(y1, y);
  };
  for (std::size_t k = 0; k < pts.x.size(); ++k) widen(pts.x[k], pts.y[k]);
  for (const Curve& c : curves)
    for (std::size_t k = 0; k < c.x.size(); ++k) widen(c.x[k], c.y[k]);
  if (!(y1 > y0)) y0 = -1, y1 = 1;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad, y1 += pad;
  auto sx = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto sy = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };

  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n",
      W, H, W / 2, title);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", ml, H - mb, W - mr);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", ml, mt, H - mb);
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + k * (x1 - x0) / 4, yv = y0 + k * (y1 - y0) / 4;
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{:.3g}</text>\n",
        sx(xv), H - mb + 18, xv);
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">{:.3g}</text>\n",
        ml - 6, sy(yv) + 4, yv);
  }
  out += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
      (ml + W - mr) / 2, H - 16, xlabel);
  out += fmt::format(
      "<text x=\"18\" y=\"{:.1f}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
      "transform=\"rotate(-90 18 {:.1f})\">{}</text>\n",
      (mt + H - mb) / 2, (mt + H - mb) / 2, ylabel);
  for (std::size_t k = 0; k < pts.x.size(); ++k)
    if (std::isfinite(pts.x[k]) && std::isfinite(pts.y[k]))
      out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.5\" fill=\"steelblue\"/>\n", sx(pts.x[k]),
                         sy(pts.y[k]));
  for (const Curve& c : curves) {
    out += "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1\" points=\"";
    // every tenth sample is plenty at this resolution
    for (std::size_t k = 0; k < c.x.size(); k += 10) out += fmt::format("{:.2f},{:.2f} ", sx(c.x[k]), sy(c.y[k]));
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

FibrePoint soliton(double v, double t, double x) {
  check_velocity(v);
  const double g = 1.0 / std::sqrt(1.0 - v * v);
  const double u = g * (x - v * t);
  const double sech = 1.0 / std::cosh(u);
  return {4.0 * std::atan(std::exp(u)), -2.0 * v * g * sech, -2.0 * g * sech};
}

const dsl::ScalarFunction& potential_slope() {
  static const dsl::ScalarFunction f =
      dsl::ScalarFunction(dsl::parse("-cos(phi)", dsl::VariableSet{{"phi"}})).derivative();
  return f;
}

void ExperimentConfig::validate() const {
  if (velocities.empty()) throw InvalidArgument("experiment: at least one velocity is required");
  for (double v : velocities) check_velocity(v);
  if (!(dt > 0 && dx > 0 && L > 0 && T >= 0)) throw InvalidArgument("experiment: dt, dx, L must be positive, T >= 0");
  for (double p : probe_x)
    if (!(p >= -L && p <= L)) throw InvalidArgument(fmt::format("experiment: probe x = {} outside [-L, L]", p));
  if (methods.empty()) throw InvalidArgument("experiment: no methods selected");
}

GridSpec ExperimentConfig::grid() const {
  return {0.0, -L, dt, dx, static_cast<int>(std::lround(T / dt)), static_cast<int>(std::lround(2 * L / dx))};
}

const char* method_name(ExplicitMethod m) { return m == ExplicitMethod::mse ? "mse" : "fe"; }

const MethodSummary* ExperimentReport::find(ExplicitMethod m) const {
  for (const auto& s : methods)
    if (s.method == m) return &s;
  return nullptr;
}

std::string ExperimentReport::summary() const {
  std::string out;
  for (const auto& s : methods)
    out += fmt::format("{}: phase_deviation={} diverged={} max_abs_phi={}\n", method_name(s.method),
                       s.phase_deviation, s.diverged ? "true" : "false", s.max_abs_phi);
  return out;
}

void phase_curve(double v, int samples, std::vector<double>& phi, std::vector<double>& p0) {
  check_velocity(v);
  if (samples < 2) throw InvalidArgument("phase_curve: need at least two samples");
  const double amp = -2.0 * v / std::sqrt(1.0 - v * v);
  phi.resize(std::size_t(samples));
  p0.resize(std::size_t(samples));
  for (int k = 0; k < samples; ++k) {
    phi[k] = 2.0 * M_PI * k / (samples - 1);
    p0[k] = amp * std::sin(0.5 * phi[k]);
  }
}

double phase_deviation(std::span<const double> phi, std::span<const double> p0, std::span<const double> v_list) {
  if (phi.empty() || phi.size() != p0.size()) throw InvalidArgument("phase_deviation: need matching nonempty points");
  if (v_list.empty()) throw InvalidArgument("phase_deviation: no reference velocity");
  std::vector<std::vector<double>> cphi(v_list.size()), cp0(v_list.size());
  for (std::size_t k = 0; k < v_list.size(); ++k) phase_curve(v_list[k], kCurveSamples, cphi[k], cp0[k]);
  const auto& kern = kernels::active();
  double worst = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    if (!std::isfinite(phi[i]) || !std::isfinite(p0[i])) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < v_list.size(); ++k)
      best = std::min(best, kern.min_sq_distance(phi[i], p0[i], cphi[k].data(), cp0[k].data(), cphi[k].size()));
    worst = std::max(worst, best);
  }
  return std::sqrt(worst);
}

double mse_defect(double v, double dt, double dx, double L) {
  const int m = static_cast<int>(std::lround(2 * L / dx));
  Slice s;
  for (int b = 0; b <= m; ++b) {
    const FibrePoint p = soliton(v, 0.0, -L + b * dx);
    s.phi.push_back(p.phi);
    s.p0.push_back(p.p0);
  }
  const Slice n = explicit_mse_step(s, dt, dt, dx, potential_slope(), BoundaryConditionSpec{});
  double worst = 0.0;
  for (int b = 1; b < m; ++b) {
    const FibrePoint e = soliton(v, dt, -L + b * dx);
    worst = std::max({worst, std::abs(n.phi[b] - e.phi), std::abs(n.p0[b] - e.p0)});
  }
  return worst / dt;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(fmt::format("cannot open {} for writing", tmp.string()));
    f << text;
    f.flush();
    if (!f) {
      f.close();
      std::filesystem::remove(tmp);
      throw Error(fmt::format("write to {} failed", tmp.string()));
    }
  }
  std::filesystem::rename(tmp, path);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  GridSpec g = cfg.grid();
  const int steps = g.n_t;
  g.n_t = std::max(steps, 1);
  const int m = g.n_x;
  const BoundaryConditionSpec bc{};  // zero Neumann on both walls

  std::vector<int> probes;
  for (double px : cfg.probe_x) probes.push_back(static_cast<int>(std::lround((px - g.x0) / g.dx)));

  ExperimentReport report;
  for (ExplicitMethod method : cfg.methods) {
    MethodSummary sum;
    sum.method = method;
    std::string t0 = "phi,p0\n", tT = "phi,p0\n", pr = "t,x,phi,p0,p1\n";
    Series s0, sT, sp;
    std::vector<double> final_phi, final_p0;
    for (double v : cfg.velocities) {
      ExplicitTrajectory tr;
      if (steps == 0) {
        // no stepping: the trajectory is the interpolated initial level
        tr.grid = g;
        tr.phi = NodeArray(1, m + 1);
        tr.p0 = NodeArray(1, m + 1);
        for (int b = 0; b <= m; ++b) {
          const FibrePoint p = soliton(v, 0.0, g.x(b));
          tr.phi(0, b) = p.phi;
          tr.p0(0, b) = p.p0;
          tr.max_abs_phi = std::max(tr.max_abs_phi, std::abs(p.phi));
        }
        tr.levels = 1;
      } else {
        tr = explicit_march(method, g, soliton_data(v), potential_slope(), bc);
      }
      sum.diverged = sum.diverged || tr.outcome == Outcome::diverged;
      sum.max_abs_phi = std::max(sum.max_abs_phi, tr.max_abs_phi);
      const int last = tr.levels - 1;
      for (int b = 0; b <= m; ++b) {
        t0 += fmt::format("{},{}\n", tr.phi(0, b), tr.p0(0, b));
        tT += fmt::format("{},{}\n", tr.phi(last, b), tr.p0(last, b));
        s0.x.push_back(tr.phi(0, b)), s0.y.push_back(tr.p0(0, b));
        sT.x.push_back(tr.phi(last, b)), sT.y.push_back(tr.p0(last, b));
        final_phi.push_back(tr.phi(last, b));
        final_p0.push_back(tr.p0(last, b));
      }
      const FieldState st = tr.field_state(bc);
      for (int a = 0; a <= last; ++a)
        for (int b : probes) {
          pr += fmt::format("{},{},{},{},{}\n", g.t(a), g.x(b), st.phi(a, b), st.p0(a, b), st.p1(a, b));
          sp.x.push_back(st.phi(a, b)), sp.y.push_back(st.p1(a, b));
        }
    }
    sum.phase_deviation = phase_deviation(final_phi, final_p0, cfg.velocities);

    const std::string name = method_name(method);
    auto emit = [&](const std::string& file, const std::string& text) {
      const auto path = out_dir / file;
      write_atomic(path, text);
      sum.files.push_back(path);
    };
    emit(name + "_phase_t0.csv", t0);
    emit(name + "_phase_tT.csv", tT);
    emit(name + "_probes.csv", pr);
    if (cfg.svg) {
      std::vector<Curve> c0, c1;
      for (double v : cfg.velocities) {
        Curve c;
        phase_curve(v, kCurveSamples, c.x, c.y);
        c0.push_back(c);
        for (double& y : c.y) y /= v;  // p1 = p0 / v on the exact solution
        c1.push_back(c);
      }
      emit(name + "_phase_t0.svg", svg_plot(name + " t = 0", "phi", "p0", s0, c0));
      emit(name + "_phase_tT.svg", svg_plot(fmt::format("{} t = {}", name, g.t(steps)), "phi", "p0", sT, c0));
      emit(name + "_probes.svg", svg_plot(name + " probes", "phi", "p1", sp, c1));
    }
    report.methods.push_back(std::move(sum));
  }
  return report;
}

}  // namespace msvi::sgbench
