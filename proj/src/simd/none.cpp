#include "msvi/kernels.hpp"

namespace msvi::kernels {
const Table* detail::avx2_table() { return nullptr; }
const Table* detail::neon_table() { return nullptr; }
}  // namespace msvi::kernels
