#include "msvi/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "msvi/sgbench.hpp"

namespace msvi::config {

namespace {

struct Entry {
  std::string value;
  int line;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"hamiltonian", {"H"}},
      {"scheme", {"builder", "time_c", "time_b", "time_a", "space_c", "space_b", "space_a"}},
      {"grid", {"t0", "x0", "dt", "dx", "n_t", "n_x"}},
      {"initial", {"phi", "p0", "profile"}},
      {"bc", {"left_kind", "left_value", "right_kind", "right_value"}},
      {"solver", {"newton_tol", "newton_max_iter", "jacobian", "fd_step"}},
      {"output", {"dir", "artifacts"}},
  };
  return k;
}

class Reader {
 public:
  Reader(std::string_view text, std::string file) : file_(std::move(file)) {
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
      const std::string_view line = trim(raw);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError(file_, line_no, std::string(line), "unterminated section header");
        section = std::string(trim(line.substr(1, line.size() - 2)));
        if (!known_keys().count(section)) throw ConfigError(file_, line_no, section, "unknown section");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError(file_, line_no, std::string(line), "expected key = value");
      const std::string key(trim(line.substr(0, eq)));
      if (section.empty()) throw ConfigError(file_, line_no, key, "key outside any [section]");
      if (!known_keys().at(section).count(key)) throw ConfigError(file_, line_no, section + "." + key, "unknown key");
      const std::string full = section + "." + key;
      if (entries_.count(full)) throw ConfigError(file_, line_no, full, "duplicate key");
      entries_[full] = {std::string(trim(line.substr(eq + 1))), line_no};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(file_, line(key), key, msg);
  }

  void text(const std::string& key, std::string& out) const {
    if (!has(key)) return;
    out = entries_.at(key).value;
    if (out.empty()) fail(key, "empty value");
  }

  void real(const std::string& key, double& out) const {
    if (has(key)) out = to_real(key, entries_.at(key).value);
  }

  void integer(const std::string& key, int& out) const {
    if (!has(key)) return;
    const std::string& v = entries_.at(key).value;
    int r = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), r);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, fmt::format("'{}' is not an integer", v));
    out = r;
  }

  void reals(const std::string& key, std::vector<double>& out) const {
    if (!has(key)) return;
    out.clear();
    for (const std::string& item : split(entries_.at(key).value)) out.push_back(to_real(key, item));
  }

  void words(const std::string& key, std::vector<std::string>& out) const {
    if (!has(key)) return;
    out = split(entries_.at(key).value);
  }

  double to_real(const std::string& key, std::string_view v) const {
    v = trim(v);
    if (!v.empty() && v.front() == '+') v.remove_prefix(1);
    double r = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), r);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(r))
      fail(key, fmt::format("'{}' is not a finite decimal number", v));
    return r;
  }

  static std::vector<std::string> split(const std::string& v) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
      const auto c = v.find(',', pos);
      out.emplace_back(trim(std::string_view(v).substr(pos, c == std::string::npos ? std::string::npos : c - pos)));
      if (c == std::string::npos) break;
      pos = c + 1;
    }
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
  }

  const std::string& file() const { return file_; }

 private:
  std::string file_;
  std::map<std::string, Entry> entries_;
};

BcKind bc_kind(const Reader& r, const std::string& key, BcKind fallback) {
  if (!r.has(key)) return fallback;
  std::string v;
  r.text(key, v);
  if (v == "neumann") return BcKind::neumann;
  if (v == "dirichlet") return BcKind::dirichlet;
  r.fail(key, fmt::format("'{}' is not a boundary kind (dirichlet or neumann)", v));
}

const char* bc_name(BcKind k) { return k == BcKind::neumann ? "neumann" : "dirichlet"; }

Tableau to_tableau(const TableauSpec& t) {
  const std::size_t s = t.b.size();
  Tableau out{t.c, t.b, Matrix(s, s)};
  if (t.a.size() != s * s)
    throw InvalidArgument(fmt::format("a has {} entries, expected {} (row-major {}x{})", t.a.size(), s * s, s, s));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) out.a(i, j) = t.a[i * s + j];
  out.validate();
  return out;
}

dsl::ScalarFunction function_of(const std::string& src, const char* var) {
  return dsl::ScalarFunction(dsl::parse(src, dsl::VariableSet{{var}}));
}

std::string list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += fmt::format("{}{}", k ? ", " : "", v[k]);
  return out;
}

// Builds every derived object, attributing failures to the responsible key.
Resolved build(const RunConfig& c, const Reader* r, const std::string& file) {
  auto fail = [&](const std::string& key, const std::string& msg) -> Resolved {
    throw ConfigError(file, r ? r->line(key) : 0, key, msg);
  };
  Resolved out;
  try {
    out.hamiltonian = dsl::compile(dsl::parse(c.hamiltonian));
  } catch (const Error& e) {
    return fail("hamiltonian.H", e.what());
  }

  if (c.builder == "gauss1") {
    out.time_tableau = out.space_tableau = gauss1();
    out.scheme = PrkScheme::from_tableaus(gauss1(), gauss1());
  } else if (c.builder == "euler-explicit") {
    out.scheme = build_explicit_pair(Tableau{{0.0}, {1.0}, Matrix{{0.0}}});
    out.time_tableau = out.scheme.time;
    out.space_tableau = out.scheme.space;
  } else if (c.builder == "custom") {
    for (const char* dir : {"time", "space"}) {
      const TableauSpec& t = std::string(dir) == "time" ? c.time : c.space;
      const std::string pre = std::string("scheme.") + dir;
      try {
        (std::string(dir) == "time" ? out.time_tableau : out.space_tableau) = to_tableau(t);
      } catch (const ZeroWeight& e) {
        return fail(pre + "_b", e.what());
      } catch (const Error& e) {
        const std::string what = e.what();
        const std::string key = what.find("weights sum") != std::string::npos ? "_b"
                                : what.find("c has") != std::string::npos ? "_c"
                                                                            : "_a";
        return fail(pre + key, what);
      }
    }
    try {
      out.scheme = PrkScheme::from_tableaus(out.time_tableau, out.space_tableau);
    } catch (const Error& e) {
      return fail("scheme.builder", e.what());
    }
  } else {
    return fail("scheme.builder", fmt::format("unknown builder '{}' (gauss1, euler-explicit or custom)", c.builder));
  }

  // validation messages name the offending field
  auto field_of = [](const std::string& what, const char* section, std::initializer_list<const char*> fields) {
    for (const char* f : fields)
      if (what.find(std::string(f) + " must") != std::string::npos) return std::string(section) + "." + f;
    return std::string(section);
  };
  try {
    c.grid.validate();
  } catch (const Error& e) {
    return fail(field_of(e.what(), "grid", {"dt", "dx", "n_t", "n_x"}), e.what());
  }
  try {
    c.solver.validate();
  } catch (const Error& e) {
    return fail(field_of(e.what(), "solver", {"newton_tol", "newton_max_iter", "fd_step"}), e.what());
  }

  if (c.soliton_v) {
    const double v = *c.soliton_v;
    if (!(v > 0 && v < 1)) return fail("initial.profile", "soliton velocity must lie in (0, 1)");
    out.initial = {[v](double x) { return sgbench::soliton(v, 0.0, x).phi; },
                   [v](double x) { return sgbench::soliton(v, 0.0, x).p0; }};
  } else {
    try {
      const auto phi = function_of(c.initial_phi, "x");
      out.initial.phi = phi;
    } catch (const Error& e) {
      return fail("initial.phi", e.what());
    }
    try {
      const auto p0 = function_of(c.initial_p0, "x");
      out.initial.p0 = p0;
    } catch (const Error& e) {
      return fail("initial.p0", e.what());
    }
  }

  for (const char* side : {"left", "right"}) {
    const bool left = std::string(side) == "left";
    try {
      const auto f = function_of(left ? c.left_value : c.right_value, "t");
      (left ? out.bc.left : out.bc.right) = {left ? c.left_kind : c.right_kind, f};
    } catch (const Error& e) {
      return fail(std::string("bc.") + side + "_value", e.what());
    }
  }
  for (const std::string& a : c.artifacts)
    if (a != "trajectory" && a != "diagnostics")
      return fail("output.artifacts", fmt::format("unknown artifact '{}' (trajectory, diagnostics)", a));
  return out;
}

}  // namespace

ConfigError::ConfigError(const std::string& file, int line, const std::string& key, const std::string& message)
    : Error(line > 0 ? fmt::format("{}:{}: {}: {}", file, line, key, message)
                     : fmt::format("{}: {}: {}", file, key, message)),
      file_(file), line_(line), key_(key) {}

RunConfig parse(std::string_view text, const std::string& file) {
  const Reader r(text, file);
  RunConfig c;
  r.text("hamiltonian.H", c.hamiltonian);
  r.text("scheme.builder", c.builder);
  r.reals("scheme.time_c", c.time.c);
  r.reals("scheme.time_b", c.time.b);
  r.reals("scheme.time_a", c.time.a);
  r.reals("scheme.space_c", c.space.c);
  r.reals("scheme.space_b", c.space.b);
  r.reals("scheme.space_a", c.space.a);
  if (c.builder != "custom")
    for (const char* k : {"time_c", "time_b", "time_a", "space_c", "space_b", "space_a"})
      if (r.has(std::string("scheme.") + k))
        r.fail(std::string("scheme.") + k, "tableau entries need builder = custom");

  r.real("grid.t0", c.grid.t0);
  r.real("grid.x0", c.grid.x0);
  r.real("grid.dt", c.grid.dt);
  r.real("grid.dx", c.grid.dx);
  r.integer("grid.n_t", c.grid.n_t);
  r.integer("grid.n_x", c.grid.n_x);

  if (r.has("initial.profile")) {
    if (r.has("initial.phi") || r.has("initial.p0"))
      r.fail("initial.profile", "profile excludes explicit phi/p0 expressions");
    std::string prof;
    r.text("initial.profile", prof);
    constexpr std::string_view tag = "soliton:";
    if (prof.rfind(tag, 0) != 0) r.fail("initial.profile", fmt::format("unknown profile '{}' (soliton:v)", prof));
    c.soliton_v = r.to_real("initial.profile", std::string_view(prof).substr(tag.size()));
  }
  r.text("initial.phi", c.initial_phi);
  r.text("initial.p0", c.initial_p0);

  c.left_kind = bc_kind(r, "bc.left_kind", c.left_kind);
  c.right_kind = bc_kind(r, "bc.right_kind", c.right_kind);
  r.text("bc.left_value", c.left_value);
  r.text("bc.right_value", c.right_value);

  r.real("solver.newton_tol", c.solver.newton_tol);
  r.integer("solver.newton_max_iter", c.solver.newton_max_iter);
  r.real("solver.fd_step", c.solver.fd_step);
  if (r.has("solver.jacobian")) {
    std::string j;
    r.text("solver.jacobian", j);
    if (j == "symbolic") c.solver.jacobian_mode = JacobianMode::symbolic_hessian;
    else if (j == "finite-difference") c.solver.jacobian_mode = JacobianMode::finite_difference;
    else r.fail("solver.jacobian", fmt::format("'{}' is not symbolic or finite-difference", j));
  }

  r.text("output.dir", c.output_dir);
  r.words("output.artifacts", c.artifacts);

  build(c, &r, file);
  return c;
}

RunConfig load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(fmt::format("{}: cannot open config", path));
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path);
}

std::string print(const RunConfig& c) {
  std::string out;
  out += fmt::format("[hamiltonian]\nH = {}\n\n", c.hamiltonian);
  out += fmt::format("[scheme]\nbuilder = {}\n", c.builder);
  if (c.builder == "custom") {
    out += fmt::format("time_c = {}\ntime_b = {}\ntime_a = {}\n", list(c.time.c), list(c.time.b), list(c.time.a));
    out += fmt::format("space_c = {}\nspace_b = {}\nspace_a = {}\n", list(c.space.c), list(c.space.b),
                       list(c.space.a));
  }
  out += fmt::format("\n[grid]\nt0 = {}\nx0 = {}\ndt = {}\ndx = {}\nn_t = {}\nn_x = {}\n\n", c.grid.t0, c.grid.x0,
                     c.grid.dt, c.grid.dx, c.grid.n_t, c.grid.n_x);
  if (c.soliton_v)
    out += fmt::format("[initial]\nprofile = soliton:{}\n\n", *c.soliton_v);
  else
    out += fmt::format("[initial]\nphi = {}\np0 = {}\n\n", c.initial_phi, c.initial_p0);
  out += fmt::format("[bc]\nleft_kind = {}\nleft_value = {}\nright_kind = {}\nright_value = {}\n\n",
                     bc_name(c.left_kind), c.left_value, bc_name(c.right_kind), c.right_value);
  out += fmt::format("[solver]\nnewton_tol = {}\nnewton_max_iter = {}\njacobian = {}\nfd_step = {}\n\n",
                     c.solver.newton_tol, c.solver.newton_max_iter,
                     c.solver.jacobian_mode == JacobianMode::symbolic_hessian ? "symbolic" : "finite-difference",
                     c.solver.fd_step);
  std::string arts;
  for (std::size_t k = 0; k < c.artifacts.size(); ++k) arts += (k ? ", " : "") + c.artifacts[k];
  out += fmt::format("[output]\ndir = {}\nartifacts = {}\n", c.output_dir, arts);
  return out;
}

Resolved resolve(const RunConfig& c, const std::string& file) { return build(c, nullptr, file); }

std::string format_matrix(const Matrix& m) {
  std::string out = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += i ? ", [" : "[";
    for (std::size_t j = 0; j < m.cols(); ++j) out += fmt::format("{}{}", j ? ", " : "", m(i, j));
    out += "]";
  }
  return out + "]";
}

}  // namespace msvi::config
