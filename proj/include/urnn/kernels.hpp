#pragma once

#include <cstddef>

namespace urnn {

// Double-precision inner loops. Every entry has a scalar reference
// implementation and may have a SIMD variant; the active table is chosen
// once at runtime from cpuid (override with URNN_KERNELS=scalar|avx2).
//
// Complex vectors are stored as split re/im arrays throughout.
struct Kernels {
  const char* name;

  // out = a .* b, elementwise complex multiply.
  void (*cmul)(const double* ar, const double* ai, const double* br,
               const double* bi, double* outr, double* outi, size_t n);
  // out = a .* conj(b).
  void (*cmul_conj)(const double* ar, const double* ai, const double* br,
                    const double* bi, double* outr, double* outi, size_t n);
  // sum_j conj(v_j) * x_j.
  void (*cdot_conj)(const double* vr, const double* vi, const double* xr,
                    const double* xi, size_t n, double* out_re, double* out_im);
  // y += (cr + i*ci) * v.
  void (*caxpy)(double cr, double ci, const double* vr, const double* vi,
                double* yr, double* yi, size_t n);

  double (*dot)(const double* a, const double* b, size_t n);
  // y += a * x.
  void (*axpy)(double a, const double* x, double* y, size_t n);
  // y += alpha * A x, A row-major m x n, x length n, y length m.
  void (*gemv)(const double* a, size_t m, size_t n, const double* x, double* y,
               double alpha);
  // y += alpha * A^T x, A row-major m x n, x length m, y length n.
  void (*gemv_t)(const double* a, size_t m, size_t n, const double* x,
                 double* y, double alpha);
  // A += alpha * x y^T, A row-major m x n.
  void (*ger)(double* a, size_t m, size_t n, const double* x, const double* y,
              double alpha);

  // One radix-2 DIT stage over bit-reversed data: for every block of
  // 2*half entries, butterfly (u, tw[j]*v). Twiddles are contiguous per
  // stage.
  void (*fft_stage)(double* re, double* im, const double* twr,
                    const double* twi, size_t n, size_t half);

  // h = z * relu(|z| + b) / (|z| + eps), elementwise over complex z.
  void (*modrelu)(const double* zr, const double* zi, const double* b,
                  double eps, double* hr, double* hi, size_t n);
  // Backward of the above for a real loss; gz is written, gb accumulated.
  void (*modrelu_vjp)(const double* zr, const double* zi, const double* b,
                      double eps, const double* gr, const double* gi,
                      double* gzr, double* gzi, double* gb, size_t n);

  // acc = decay*acc + (1-decay)*g^2; p -= lr * g / (sqrt(acc) + eps).
  void (*rmsprop)(double* p, double* acc, const double* g, size_t n, double lr,
                  double decay, double eps);
};

const Kernels& scalar_kernels();
// Null when the binary or the CPU lacks AVX2+FMA.
const Kernels* avx2_kernels();
// Active table (decided once, thread-safe).
const Kernels& kernels();

}  // namespace urnn
