#pragma once

// Run configuration: a line-oriented `key = value` format with [section]
// headers, `#` comments and comma-separated lists.
//
//   [hamiltonian]  H
//   [scheme]       builder = gauss1 | euler-explicit | custom
//                  time_c, time_b, time_a, space_c, space_b, space_a
//                  (custom only; a is row-major)
//   [grid]         t0, x0, dt, dx, n_t, n_x
//   [initial]      phi, p0 (expressions in x) or profile = soliton:v
//   [bc]           left_kind, left_value, right_kind, right_value
//                  (kind dirichlet | neumann, value an expression in t)
//   [solver]       newton_tol, newton_max_iter, jacobian, fd_step
//   [output]       dir, artifacts (trajectory, diagnostics)

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "msvi/core.hpp"
#include "msvi/hamdsl.hpp"
#include "msvi/solver.hpp"
#include "msvi/tableau.hpp"

namespace msvi::config {

/// Names the file, line and key; line 0 means the key was missing.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& file, int line, const std::string& key, const std::string& message);
  const std::string& file() const { return file_; }
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::string file_;
  int line_;
  std::string key_;
};

struct TableauSpec {
  std::vector<double> c, b, a;

  friend bool operator==(const TableauSpec&, const TableauSpec&) = default;
};

struct RunConfig {
  std::string hamiltonian = "0.5*p0^2 - 0.5*p1^2 - cos(phi)";
  std::string builder = "gauss1";
  TableauSpec time, space;  // custom builder only
  GridSpec grid{0.0, 0.0, 0.05, 0.1, 10, 10};
  std::string initial_phi = "0";
  std::string initial_p0 = "0";
  std::optional<double> soliton_v;
  BcKind left_kind = BcKind::neumann, right_kind = BcKind::neumann;
  std::string left_value = "0", right_value = "0";
  SolverConfig solver;
  std::string output_dir = "out";
  std::vector<std::string> artifacts{"trajectory"};

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates; every failure is a ConfigError.
RunConfig parse(std::string_view text, const std::string& file = "<config>");
/// Unreadable files throw Error (an I/O failure, not a config error).
RunConfig load(const std::string& path);
/// Canonical text form; parse(print(c)) == c.
std::string print(const RunConfig& c);

/// Objects built from a validated config.
struct Resolved {
  HamiltonianPtr hamiltonian;
  PrkScheme scheme;
  Tableau time_tableau, space_tableau;
  InitialData initial;
  BoundaryConditionSpec bc;
};

Resolved resolve(const RunConfig& c, const std::string& file = "<config>");

std::string format_matrix(const Matrix& m);

}  // namespace msvi::config
