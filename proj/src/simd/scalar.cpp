#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>

#include "msvi/kernels.hpp"

namespace msvi::kernels {
namespace {

void axpy(const double* x, double a, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void wave_update(const double* p0, const double* s, const double* force, double dt, double dx2, double* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i);
    out[i] = p0[i] + dt * ((s[k + 1] - 2.0 * s[k] + s[k - 1]) / dx2) - dt * force[i];
  }
}

ScanResult scan(const double* x, std::size_t n) {
  ScanResult r{true, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(x[i])) return {false, 0.0};
    r.max_abs = std::fmax(r.max_abs, std::fabs(x[i]));
  }
  return r;
}

double min_sq_distance(double px, double py, const double* cx, const double* cy, std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = cx[k] - px;
    const double dy = cy[k] - py;
    const double d = dx * dx + dy * dy;
    if (d < best) best = d;
  }
  return best;
}

constexpr Table kScalar{Isa::scalar, "scalar", axpy, wave_update, scan, min_sq_distance};

}  // namespace

const Table& scalar_table() { return kScalar; }

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &kScalar;
    case Isa::avx2: return detail::avx2_table();
    case Isa::neon: return detail::neon_table();
  }
  return nullptr;
}

const Table& active() {
  static const Table* chosen = [] {
    const char* env = std::getenv("MSVI_KERNELS");
    if (env && std::strcmp(env, "scalar") == 0) return &kScalar;
    if (const Table* t = detail::avx2_table()) return t;
    if (const Table* t = detail::neon_table()) return t;
    return &kScalar;
  }();
  return *chosen;
}

}  // namespace msvi::kernels
