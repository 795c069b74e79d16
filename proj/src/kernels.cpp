#include "urnn/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "urnn/rng.hpp"

namespace urnn {

#ifdef URNN_HAVE_AVX2_TU
const Kernels* avx2_kernels_impl();
#endif

const Kernels* avx2_kernels() {
#ifdef URNN_HAVE_AVX2_TU
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return avx2_kernels_impl();
  }
#endif
  return nullptr;
}

namespace {

const Kernels* select() {
  if (const char* env = std::getenv("URNN_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(env, "avx2") == 0 && avx2_kernels()) return avx2_kernels();
  }
  if (const Kernels* k = avx2_kernels()) return k;
  return &scalar_kernels();
}

}  // namespace

const Kernels& kernels() {
  static const Kernels* active = select();
  return *active;
}

std::vector<uint32_t> random_permutation(size_t n, uint64_t seed) {
  std::vector<uint32_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = static_cast<uint32_t>(i);
  Rng rng(seed);
  for (size_t i = n; i > 1; --i) {
    const size_t j = rng.uniform_index(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace urnn
