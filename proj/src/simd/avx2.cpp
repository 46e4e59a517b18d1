// Built with -mavx2 on x86-64; selected only when the CPU reports AVX2.

#include "msvi/kernels.hpp"

#if defined(__AVX2__)

#include <cmath>
#include <immintrin.h>
#include <limits>

namespace msvi::kernels {
namespace {

void axpy(const double* x, double a, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), prod));
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void wave_update(const double* p0, const double* s, const double* force, double dt, double dx2, double* out,
                 std::size_t n) {
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d vdx2 = _mm256_set1_pd(dx2);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d right = _mm256_loadu_pd(s + i + 1);
    const __m256d mid = _mm256_loadu_pd(s + i);
    const __m256d left = _mm256_loadu_pd(s + i - 1);
    __m256d lap = _mm256_sub_pd(right, _mm256_mul_pd(two, mid));
    lap = _mm256_add_pd(lap, left);
    lap = _mm256_div_pd(lap, vdx2);
    __m256d r = _mm256_add_pd(_mm256_loadu_pd(p0 + i), _mm256_mul_pd(vdt, lap));
    r = _mm256_sub_pd(r, _mm256_mul_pd(vdt, _mm256_loadu_pd(force + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) {
    const std::ptrdiff_t k = static_cast<std::ptrdiff_t>(i);
    out[i] = p0[i] + dt * ((s[k + 1] - 2.0 * s[k] + s[k - 1]) / dx2) - dt * force[i];
  }
}

ScanResult scan(const double* x, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  __m256d vmax = zero;
  __m256d ok = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    // v - v is 0 for finite v and NaN otherwise
    ok = _mm256_and_pd(ok, _mm256_cmp_pd(_mm256_sub_pd(v, v), zero, _CMP_EQ_OQ));
    vmax = _mm256_max_pd(vmax, _mm256_andnot_pd(sign, v));
  }
  if (_mm256_movemask_pd(ok) != 0xF) return {false, 0.0};
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double m = std::fmax(std::fmax(lanes[0], lanes[1]), std::fmax(lanes[2], lanes[3]));
  for (; i < n; ++i) {
    if (!std::isfinite(x[i])) return {false, 0.0};
    m = std::fmax(m, std::fabs(x[i]));
  }
  return {true, m};
}

double min_sq_distance(double px, double py, const double* cx, const double* cy, std::size_t n) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(cx + k), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(cy + k), vy);
    best = _mm256_min_pd(best, _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, best);
  double m = lanes[0];
  for (int l = 1; l < 4; ++l)
    if (lanes[l] < m) m = lanes[l];
  for (; k < n; ++k) {
    const double dx = cx[k] - px;
    const double dy = cy[k] - py;
    const double d = dx * dx + dy * dy;
    if (d < m) m = d;
  }
  return m;
}

constexpr Table kAvx2{Isa::avx2, "avx2", axpy, wave_update, scan, min_sq_distance};

}  // namespace

const Table* detail::avx2_table() {
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace msvi::kernels

#else

namespace msvi::kernels {
const Table* detail::avx2_table() { return nullptr; }
}  // namespace msvi::kernels

#endif
