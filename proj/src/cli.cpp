#include "msvi/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "msvi/config.hpp"
#include "msvi/diagnostics.hpp"
#include "msvi/sgbench.hpp"

namespace msvi::cli {

namespace {

class Diverged : public Error {
 public:
  using Error::Error;
};

void report_tableau(std::ostream& out, const char* name, const Tableau& t) {
  out << fmt::format("[{}]\nstages: {}\n", name, t.stages());
  std::string c, b;
  for (std::size_t i = 0; i < t.c.size(); ++i) c += fmt::format("{}{}", i ? ", " : "", t.c[i]);
  for (std::size_t i = 0; i < t.b.size(); ++i) b += fmt::format("{}{}", i ? ", " : "", t.b[i]);
  out << fmt::format("c: [{}]\nb: [{}]\na: {}\n", c, b, config::format_matrix(t.a));
  out << "weights: pass\n";
  out << fmt::format("symplectic_pair: {}\n", config::format_matrix(symplectic_pair(t)));
  out << fmt::format("involution: {}\n", involution_check(t) ? "pass" : "fail");
  const bool inv = is_invertible(t.a);
  out << fmt::format("invertible: {}\n", inv ? "yes" : "no");
  if (inv) {
    const bool wd = check_well_defined(t, momentum_expansion_from_conjugate(t, symplectic_pair(t)), t.b);
    out << fmt::format("well_defined: {}\n", wd ? "pass" : "fail");
  } else {
    out << "well_defined: n/a (singular a; the scheme is only solvable slice-wide)\n";
  }
}

Trajectory march_config(const config::RunConfig& c, const config::Resolved& r, bool record) {
  MarchOptions opts;
  opts.record_boxes = record;
  Trajectory tr = march(*r.hamiltonian, r.scheme, c.grid, r.initial, r.bc, c.solver, opts);
  if (tr.outcome == Outcome::diverged)
    throw Diverged(fmt::format("march diverged at slice {}, cell {} (t = {})", tr.failed_slice, tr.failed_cell,
                               c.grid.t(tr.failed_slice)));
  return tr;
}

std::string trajectory_csv(const Trajectory& tr) {
  const GridSpec& g = tr.grid;
  const int sigma = tr.scheme.sigma();
  std::string out = "t,x,phi,p0\n";
  for (int a = 0; a < static_cast<int>(tr.level_phi.size()); ++a)
    for (int b = 0; b < g.n_x; ++b)
      for (int al = 0; al < sigma; ++al) {
        const std::size_t k = static_cast<std::size_t>(b * sigma + al);
        out += fmt::format("{},{},{},{}\n", g.t(a), g.x(b) + tr.scheme.space.c[al] * g.dx, tr.level_phi[a][k],
                           tr.level_p0[a][k]);
      }
  return out;
}

std::string diagnostics_csv(const std::vector<DiagnosticRow>& rows) {
  std::string out = "a,b,name,value\n";
  for (const auto& r : rows) out += fmt::format("{},{},{},{}\n", r.a, r.b, r.name, r.value);
  return out;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multisymplectic box-scheme integrators for 1+1 dimensional Hamiltonian PDEs", "msvi"};
  app.require_subcommand(1);

  std::string cfg_path;
  bool print_config = false;
  auto* run = app.add_subcommand("run", "march a configured PDE, write the trajectory and diagnostics");
  run->add_option("config", cfg_path, "config file")->required();
  run->add_flag("--print-config", print_config, "echo the parsed config and exit");

  auto* vt = app.add_subcommand("validate-tableau", "report tableau invariants");
  vt->add_option("config", cfg_path, "config file")->required();
  vt->add_flag("--print-config", print_config, "echo the parsed config and exit");

  auto* diag = app.add_subcommand("diagnose", "residual sweep over every box of a run, CSV on stdout");
  diag->add_option("config", cfg_path, "config file")->required();
  diag->add_flag("--print-config", print_config, "echo the parsed config and exit");
  int pairs = 1;
  diag->add_option("--pairs", pairs, "random tangent pairs per slice")->check(CLI::PositiveNumber);

  sgbench::ExperimentConfig exp;
  std::string out_dir = "sg_out";
  auto* bench = app.add_subcommand("bench-sg", "sine-Gordon kink experiment, MSE vs FE");
  bench->add_option("--out", out_dir, "output directory");
  auto* dt_opt = bench->add_option("--dt", exp.dt, "time step (default dx/2)");
  bench->add_option("--dx", exp.dx, "space step");
  bench->add_option("--T", exp.T, "final time");
  bench->add_option("--L", exp.L, "half-width of the domain");
  bench->add_option("--v", exp.velocities, "comma-separated velocities")->delimiter(',');
  bench->add_flag("--svg", exp.svg, "also write SVG scatter plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "msvi: " << e.what() << "\n";
    return config_error;
  }

  try {
    if (bench->parsed()) {
      if (dt_opt->count() == 0) exp.dt = exp.dx / 2;
      try {
        exp.validate();
      } catch (const InvalidArgument& e) {
        err << "msvi: bench-sg: " << e.what() << "\n";
        return config_error;
      }
      const auto rep = sgbench::run_experiment(exp, out_dir);
      for (const auto& m : rep.methods)
        for (const auto& f : m.files) out << "wrote " << f.string() << "\n";
      out << rep.summary();
      return ok;
    }

    const config::RunConfig c = config::load(cfg_path);
    if (print_config) {
      out << config::print(c);
      return ok;
    }
    const config::Resolved r = config::resolve(c, cfg_path);

    if (vt->parsed()) {
      report_tableau(out, "time", r.time_tableau);
      report_tableau(out, "space", r.space_tableau);
      return ok;
    }

    const bool want_diag =
        diag->parsed() || std::find(c.artifacts.begin(), c.artifacts.end(), "diagnostics") != c.artifacts.end();
    const Trajectory tr = march_config(c, r, want_diag);
    SweepOptions so;
    so.tangent_pairs = pairs;
    if (diag->parsed()) {
      out << diagnostics_csv(sweep(*r.hamiltonian, tr, r.bc, c.solver, so));
      return ok;
    }

    std::filesystem::create_directories(c.output_dir);
    const std::filesystem::path dir(c.output_dir);
    if (std::find(c.artifacts.begin(), c.artifacts.end(), "trajectory") != c.artifacts.end()) {
      sgbench::write_atomic(dir / "trajectory.csv", trajectory_csv(tr));
      out << "wrote " << (dir / "trajectory.csv").string() << "\n";
    }
    if (want_diag) {
      sgbench::write_atomic(dir / "diagnostics.csv", diagnostics_csv(sweep(*r.hamiltonian, tr, r.bc, c.solver, so)));
      out << "wrote " << (dir / "diagnostics.csv").string() << "\n";
    }
    out << fmt::format("completed {} slices\n", tr.completed_slices());
    return ok;
  } catch (const config::ConfigError& e) {
    err << "msvi: " << e.what() << "\n";
    return config_error;
  } catch (const SingularTableau& e) {
    err << "msvi: " << cfg_path << ": scheme: " << e.what() << "\n";
    return config_error;
  } catch (const Diverged& e) {
    err << "msvi: " << e.what() << "\n";
    return divergence;
  } catch (const SolveError& e) {
    err << "msvi: " << e.what() << "\n";
    return divergence;
  } catch (const std::exception& e) {
    err << "msvi: " << e.what() << "\n";
    return io_error;
  }
}

}  // namespace msvi::cli
