#pragma once

#include <cstddef>
#include <string_view>

namespace dtrans::kernels {

/// Dense double-precision primitives with scalar, AVX2 and NEON variants.
struct KernelTable {
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sq_dist)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

/// Best table for this CPU; DTRANS_SIMD=scalar forces the reference kernels.
const KernelTable& active();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double sq_dist(const double* a, const double* b, std::size_t n) {
  return active().sq_dist(a, b, n);
}

}  // namespace dtrans::kernels
