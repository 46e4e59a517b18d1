// AArch64 NEON variant; NEON is baseline there so no runtime probe is needed.

#include "msvi/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>
#include <cmath>
#include <limits>

namespace msvi::kernels {
namespace {

void axpy(const double* x, double a, const double* y, double* out, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(va, vld1q_f64(y + i))));
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void wave_update(const double* p0, const double* s, const double* force, double dt, double dx2, double* out,
                 std::size_t n) {
  const float64x2_t vdt = vdupq_n_f64(dt);
  const float64x2_t vdx2 = vdupq_n_f64(dx2);
  const float64x2_t two = vdupq_n_f64(2.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t lap = vsubq_f64(vld1q_f64(s + i + 1), vmulq_f64(two, vld1q_f64(s + i)));
    lap = vaddq_f64(lap, vld1q_f64(s + i - 1));
    lap = vdivq_f64(lap, vdx2);
    float64x2_t r = vaddq_f64(vld1q_f64(p0 + i), vmulq_f64(vdt, lap));
    r = vsubq_f64(r, vmulq_f64(vdt, vld1q_f64(force + i)));
    vst1q_f64(out + i, r);
  }
  for (; i < n; ++i) {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i);
    out[i] = p0[i] + dt * ((s[k + 1] - 2.0 * s[k] + s[k - 1]) / dx2) - dt * force[i];
  }
}

ScanResult scan(const double* x, std::size_t n) {
  float64x2_t vmax = vdupq_n_f64(0.0);
  uint64x2_t ok = vdupq_n_u64(~0ull);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(x + i);
    ok = vandq_u64(ok, vceqq_f64(vsubq_f64(v, v), vdupq_n_f64(0.0)));
    vmax = vmaxq_f64(vmax, vabsq_f64(v));
  }
  if ((vgetq_lane_u64(ok, 0) & vgetq_lane_u64(ok, 1)) != ~0ull) return {false, 0.0};
  double m = std::fmax(vgetq_lane_f64(vmax, 0), vgetq_lane_f64(vmax, 1));
  for (; i < n; ++i) {
    if (!std::isfinite(x[i])) return {false, 0.0};
    m = std::fmax(m, std::fabs(x[i]));
  }
  return {true, m};
}

double min_sq_distance(double px, double py, const double* cx, const double* cy, std::size_t n) {
  const float64x2_t vx = vdupq_n_f64(px);
  const float64x2_t vy = vdupq_n_f64(py);
  float64x2_t best = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t k = 0;
  for (; k + 2 <= n; k += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(cx + k), vx);
    const float64x2_t dy = vsubq_f64(vld1q_f64(cy + k), vy);
    best = vminq_f64(best, vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)));
  }
  double m = vgetq_lane_f64(best, 0);
  if (vgetq_lane_f64(best, 1) < m) m = vgetq_lane_f64(best, 1);
  for (; k < n; ++k) {
    const double dx = cx[k] - px;
    const double dy = cy[k] - py;
    const double d = dx * dx + dy * dy;
    if (d < m) m = d;
  }
  return m;
}

constexpr Table kNeon{Isa::neon, "neon", axpy, wave_update, scan, min_sq_distance};

}  // namespace

const Table* detail::neon_table() { return &kNeon; }

}  // namespace msvi::kernels

#else

namespace msvi::kernels {
const Table* detail::neon_table() { return nullptr; }
}  // namespace msvi::kernels

#endif
