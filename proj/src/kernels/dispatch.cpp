#include <cstdlib>
#include <cstring>

#include "dtrans/kernels.hpp"

namespace dtrans::kernels {

#if !DTRANS_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !DTRANS_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("DTRANS_SIMD"); env && std::strcmp(env, "scalar") == 0) {
    return scalar_table();
  }
  if (const KernelTable* t = avx2_table()) return *t;
  if (const KernelTable* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace dtrans::kernels
