#pragma once

// Inner loops of the explicit schemes and of the phase-plane metric. Each ISA
// provides the same table; results are bit-identical to the scalar table
// (same operation order, no FMA contraction).

#include <cstddef>

namespace msvi::kernels {

enum class Isa { scalar, avx2, neon };

struct ScanResult {
  bool finite;
  double max_abs;  // meaningful only when finite
};

struct Table {
  Isa isa;
  const char* name;
  // out[i] = x[i] + a * y[i]
  void (*axpy)(const double* x, double a, const double* y, double* out, std::size_t n);
  // out[i] = p0[i] + dt * ((s[i+1] - 2 s[i] + s[i-1]) / dx2) - dt * force[i]
  // s[-1] and s[n] must be readable.
  void (*wave_update)(const double* p0, const double* s, const double* force, double dt, double dx2,
                      double* out, std::size_t n);
  ScanResult (*scan)(const double* x, std::size_t n);
  // min over k of (cx[k] - px)^2 + (cy[k] - py)^2; +inf when n == 0
  double (*min_sq_distance)(double px, double py, const double* cx, const double* cy, std::size_t n);
};

const Table& scalar_table();
/// nullptr when the ISA was not compiled in or the CPU lacks it.
const Table* table_for(Isa isa);
/// Best available table; MSVI_KERNELS=scalar in the environment forces the
/// reference kernels.
const Table& active();

namespace detail {
const Table* avx2_table();
const Table* neon_table();
}  // namespace detail

}  // namespace msvi::kernels
