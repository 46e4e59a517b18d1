#pragma once

// Sine-Gordon kink benchmark: exact travelling solution, MSE vs FE runs with
// phase-plane datasets, and the deviation metric against the exact curves.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "msvi/core.hpp"
#include "msvi/solver.hpp"

namespace msvi::sgbench {

/// phi = 4 arctan(exp(u)), u = (x - v t) / sqrt(1 - v^2), with p0 = d_t phi
/// and p1 = -d_x phi.
FibrePoint soliton(double v, double t, double x);

/// V'(phi) = sin(phi).
const dsl::ScalarFunction& potential_slope();

struct ExperimentConfig {
  std::vector<double> velocities{0.50, 0.47, 0.45};
  double L = 20.0;
  double dx = 0.1;
  double dt = 0.05;
  double T = 20.0;
  std::vector<double> probe_x{5.0, 6.0};
  std::vector<ExplicitMethod> methods{ExplicitMethod::mse, ExplicitMethod::fe};
  bool svg = false;

  void validate() const;
  GridSpec grid() const;  // [-L, L], round(2L/dx) cells, round(T/dt) steps
};

const char* method_name(ExplicitMethod m);

struct MethodSummary {
  ExplicitMethod method;
  double phase_deviation = 0.0;  // final-level points against the exact curves
  bool diverged = false;
  double max_abs_phi = 0.0;
  std::vector<std::filesystem::path> files;
};

struct ExperimentReport {
  std::vector<MethodSummary> methods;

  const MethodSummary* find(ExplicitMethod m) const;
  std::string summary() const;
};

/// Each velocity is an independent trajectory with zero-Neumann walls. Per
/// method writes {method}_phase_t0.csv, {method}_phase_tT.csv (phi,p0) and
/// {method}_probes.csv (t,x,phi,p0,p1), rows grouped by velocity in config
/// order; a diverged run contributes its last finite level to the tT file.
ExperimentReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// Exact (phi, p0) curve of velocity v: phi uniform on [0, 2 pi] with
/// p0 = -2 v / sqrt(1 - v^2) sin(phi / 2).
void phase_curve(double v, int samples, std::vector<double>& phi, std::vector<double>& p0);

/// Largest distance from a point to the union of exact curves of v_list,
/// each sampled at 10001 points.
double phase_deviation(std::span<const double> phi, std::span<const double> p0, std::span<const double> v_list);

/// max over interior nodes of |MSE step of the exact solution - exact| / dt,
/// over both phi and p0, for one step from t = 0 on [-L, L].
double mse_defect(double v, double dt, double dx, double L);

/// Writes `text` to `path` through a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace msvi::sgbench
