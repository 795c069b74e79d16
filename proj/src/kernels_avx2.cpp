// AVX2+FMA variants of the inner loops. This TU is compiled with
// -mavx2 -mfma and must only be reached after the runtime cpuid check in
// kernels.cpp.

#include "urnn/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace urnn {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void cmul(const double* ar, const double* ai, const double* br,
          const double* bi, double* outr, double* outi, size_t n) {
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d xr = _mm256_loadu_pd(ar + j);
    __m256d xi = _mm256_loadu_pd(ai + j);
    __m256d yr = _mm256_loadu_pd(br + j);
    __m256d yi = _mm256_loadu_pd(bi + j);
    __m256d re = _mm256_fmsub_pd(xr, yr, _mm256_mul_pd(xi, yi));
    __m256d im = _mm256_fmadd_pd(xr, yi, _mm256_mul_pd(xi, yr));
    _mm256_storeu_pd(outr + j, re);
    _mm256_storeu_pd(outi + j, im);
  }
  for (; j < n; ++j) {
    const double re = ar[j] * br[j] - ai[j] * bi[j];
    const double im = ar[j] * bi[j] + ai[j] * br[j];
    outr[j] = re;
    outi[j] = im;
  }
}

void cmul_conj(const double* ar, const double* ai, const double* br,
               const double* bi, double* outr, double* outi, size_t n) {
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d xr = _mm256_loadu_pd(ar + j);
    __m256d xi = _mm256_loadu_pd(ai + j);
    __m256d yr = _mm256_loadu_pd(br + j);
    __m256d yi = _mm256_loadu_pd(bi + j);
    __m256d re = _mm256_fmadd_pd(xr, yr, _mm256_mul_pd(xi, yi));
    __m256d im = _mm256_fmsub_pd(xi, yr, _mm256_mul_pd(xr, yi));
    _mm256_storeu_pd(outr + j, re);
    _mm256_storeu_pd(outi + j, im);
  }
  for (; j < n; ++j) {
    const double re = ar[j] * br[j] + ai[j] * bi[j];
    const double im = ai[j] * br[j] - ar[j] * bi[j];
    outr[j] = re;
    outi[j] = im;
  }
}

void cdot_conj(const double* vr, const double* vi, const double* xr,
               const double* xi, size_t n, double* out_re, double* out_im) {
  __m256d sre = _mm256_setzero_pd();
  __m256d sim = _mm256_setzero_pd();
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d ar = _mm256_loadu_pd(vr + j);
    __m256d ai = _mm256_loadu_pd(vi + j);
    __m256d br = _mm256_loadu_pd(xr + j);
    __m256d bi = _mm256_loadu_pd(xi + j);
    sre = _mm256_fmadd_pd(ar, br, sre);
    sre = _mm256_fmadd_pd(ai, bi, sre);
    sim = _mm256_fmadd_pd(ar, bi, sim);
    sim = _mm256_fnmadd_pd(ai, br, sim);
  }
  double re = hsum(sre), im = hsum(sim);
  for (; j < n; ++j) {
    re += vr[j] * xr[j] + vi[j] * xi[j];
    im += vr[j] * xi[j] - vi[j] * xr[j];
  }
  *out_re = re;
  *out_im = im;
}

void caxpy(double cr, double ci, const double* vr, const double* vi,
           double* yr, double* yi, size_t n) {
  __m256d vcr = _mm256_set1_pd(cr);
  __m256d vci = _mm256_set1_pd(ci);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d ar = _mm256_loadu_pd(vr + j);
    __m256d ai = _mm256_loadu_pd(vi + j);
    __m256d outr = _mm256_loadu_pd(yr + j);
    __m256d outi = _mm256_loadu_pd(yi + j);
    outr = _mm256_fmadd_pd(vcr, ar, outr);
    outr = _mm256_fnmadd_pd(vci, ai, outr);
    outi = _mm256_fmadd_pd(vcr, ai, outi);
    outi = _mm256_fmadd_pd(vci, ar, outi);
    _mm256_storeu_pd(yr + j, outr);
    _mm256_storeu_pd(yi + j, outi);
  }
  for (; j < n; ++j) {
    yr[j] += cr * vr[j] - ci * vi[j];
    yi[j] += cr * vi[j] + ci * vr[j];
  }
}

double dot(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j + 4),
                           _mm256_loadu_pd(b + j + 4), acc1);
  }
  for (; j + 4 <= n; j += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j),
                           acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
  __m256d va = _mm256_set1_pd(a);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vy = _mm256_loadu_pd(y + j);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), vy);
    _mm256_storeu_pd(y + j, vy);
  }
  for (; j < n; ++j) y[j] += a * x[j];
}

void gemv(const double* a, size_t m, size_t n, const double* x, double* y,
          double alpha) {
  for (size_t i = 0; i < m; ++i) y[i] += alpha * dot(a + i * n, x, n);
}

void gemv_t(const double* a, size_t m, size_t n, const double* x, double* y,
            double alpha) {
  for (size_t i = 0; i < m; ++i) axpy(alpha * x[i], a + i * n, y, n);
}

void ger(double* a, size_t m, size_t n, const double* x, const double* y,
         double alpha) {
  for (size_t i = 0; i < m; ++i) axpy(alpha * x[i], y, a + i * n, n);
}

void fft_stage(double* re, double* im, const double* twr, const double* twi,
               size_t n, size_t half) {
  if (half < 4) {
    scalar_kernels().fft_stage(re, im, twr, twi, n, half);
    return;
  }
  for (size_t base = 0; base < n; base += 2 * half) {
    double* re0 = re + base;
    double* im0 = im + base;
    double* re1 = re0 + half;
    double* im1 = im0 + half;
    for (size_t j = 0; j < half; j += 4) {
      __m256d wr = _mm256_loadu_pd(twr + j);
      __m256d wi = _mm256_loadu_pd(twi + j);
      __m256d vr = _mm256_loadu_pd(re1 + j);
      __m256d vi = _mm256_loadu_pd(im1 + j);
      __m256d tr = _mm256_fmsub_pd(wr, vr, _mm256_mul_pd(wi, vi));
      __m256d ti = _mm256_fmadd_pd(wr, vi, _mm256_mul_pd(wi, vr));
      __m256d ur = _mm256_loadu_pd(re0 + j);
      __m256d ui = _mm256_loadu_pd(im0 + j);
      _mm256_storeu_pd(re0 + j, _mm256_add_pd(ur, tr));
      _mm256_storeu_pd(im0 + j, _mm256_add_pd(ui, ti));
      _mm256_storeu_pd(re1 + j, _mm256_sub_pd(ur, tr));
      _mm256_storeu_pd(im1 + j, _mm256_sub_pd(ui, ti));
    }
  }
}

void modrelu(const double* zr, const double* zi, const double* b, double eps,
             double* hr, double* hi, size_t n) {
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d xr = _mm256_loadu_pd(zr + j);
    __m256d xi = _mm256_loadu_pd(zi + j);
    __m256d r = _mm256_sqrt_pd(
        _mm256_fmadd_pd(xr, xr, _mm256_mul_pd(xi, xi)));
    __m256d m = _mm256_add_pd(r, _mm256_loadu_pd(b + j));
    __m256d s = _mm256_div_pd(m, _mm256_add_pd(r, veps));
    __m256d mask = _mm256_cmp_pd(m, zero, _CMP_GE_OQ);
    s = _mm256_and_pd(s, mask);
    _mm256_storeu_pd(hr + j, _mm256_mul_pd(s, xr));
    _mm256_storeu_pd(hi + j, _mm256_mul_pd(s, xi));
  }
  for (; j < n; ++j) {
    const double r = std::sqrt(zr[j] * zr[j] + zi[j] * zi[j]);
    const double m = r + b[j];
    const double s = m >= 0.0 ? m / (r + eps) : 0.0;
    hr[j] = s * zr[j];
    hi[j] = s * zi[j];
  }
}

void modrelu_vjp(const double* zr, const double* zi, const double* b,
                 double eps, const double* gr, const double* gi, double* gzr,
                 double* gzi, double* gb, size_t n) {
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d xr = _mm256_loadu_pd(zr + j);
    __m256d xi = _mm256_loadu_pd(zi + j);
    __m256d vb = _mm256_loadu_pd(b + j);
    __m256d r = _mm256_sqrt_pd(
        _mm256_fmadd_pd(xr, xr, _mm256_mul_pd(xi, xi)));
    __m256d m = _mm256_add_pd(r, vb);
    __m256d mask = _mm256_cmp_pd(m, zero, _CMP_GE_OQ);
    __m256d d = _mm256_add_pd(r, veps);
    __m256d s = _mm256_div_pd(m, d);
    __m256d k = _mm256_div_pd(_mm256_sub_pd(veps, vb), _mm256_mul_pd(d, d));
    // 1/r with the origin guarded; z is 0 there so the product vanishes.
    __m256d rmask = _mm256_cmp_pd(r, zero, _CMP_GT_OQ);
    __m256d rinv = _mm256_blendv_pd(zero, _mm256_div_pd(one, r), rmask);
    __m256d kr = _mm256_mul_pd(k, rinv);
    __m256d vgr = _mm256_loadu_pd(gr + j);
    __m256d vgi = _mm256_loadu_pd(gi + j);
    __m256d cross = _mm256_mul_pd(_mm256_mul_pd(xr, xi), kr);
    __m256d dxx = _mm256_fmadd_pd(_mm256_mul_pd(xr, xr), kr, s);
    __m256d dyy = _mm256_fmadd_pd(_mm256_mul_pd(xi, xi), kr, s);
    __m256d outr = _mm256_fmadd_pd(vgr, dxx, _mm256_mul_pd(vgi, cross));
    __m256d outi = _mm256_fmadd_pd(vgr, cross, _mm256_mul_pd(vgi, dyy));
    _mm256_storeu_pd(gzr + j, _mm256_and_pd(outr, mask));
    _mm256_storeu_pd(gzi + j, _mm256_and_pd(outi, mask));
    __m256d gbj = _mm256_div_pd(
        _mm256_fmadd_pd(vgr, xr, _mm256_mul_pd(vgi, xi)), d);
    gbj = _mm256_and_pd(gbj, mask);
    _mm256_storeu_pd(gb + j, _mm256_add_pd(_mm256_loadu_pd(gb + j), gbj));
  }
  for (; j < n; ++j) {
    const double r = std::sqrt(zr[j] * zr[j] + zi[j] * zi[j]);
    const double m = r + b[j];
    if (m < 0.0) {
      gzr[j] = 0.0;
      gzi[j] = 0.0;
      continue;
    }
    const double d = r + eps;
    const double s = m / d;
    const double k = (eps - b[j]) / (d * d);
    const double rinv = r > 0.0 ? 1.0 / r : 0.0;
    const double kr = k * rinv;
    gzr[j] = gr[j] * (s + zr[j] * zr[j] * kr) + gi[j] * (zr[j] * zi[j] * kr);
    gzi[j] = gr[j] * (zr[j] * zi[j] * kr) + gi[j] * (s + zi[j] * zi[j] * kr);
    gb[j] += (gr[j] * zr[j] + gi[j] * zi[j]) / d;
  }
}

void rmsprop(double* p, double* acc, const double* g, size_t n, double lr,
             double decay, double eps) {
  const __m256d vdecay = _mm256_set1_pd(decay);
  const __m256d vomd = _mm256_set1_pd(1.0 - decay);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vg = _mm256_loadu_pd(g + j);
    __m256d va = _mm256_loadu_pd(acc + j);
    va = _mm256_fmadd_pd(vdecay, va,
                         _mm256_mul_pd(vomd, _mm256_mul_pd(vg, vg)));
    _mm256_storeu_pd(acc + j, va);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(va), veps);
    __m256d vp = _mm256_loadu_pd(p + j);
    vp = _mm256_sub_pd(vp, _mm256_div_pd(_mm256_mul_pd(vlr, vg), denom));
    _mm256_storeu_pd(p + j, vp);
  }
  for (; j < n; ++j) {
    acc[j] = decay * acc[j] + (1.0 - decay) * g[j] * g[j];
    p[j] -= lr * g[j] / (std::sqrt(acc[j]) + eps);
  }
}

}  // namespace

const Kernels* avx2_kernels_impl() {
  static const Kernels k = {
      "avx2", cmul,      cmul_conj, cdot_conj,   caxpy,   dot,
      axpy,   gemv,      gemv_t,    ger,         fft_stage,
      modrelu, modrelu_vjp, rmsprop,
  };
  return &k;
}

}  // namespace urnn

#endif  // __AVX2__ && __FMA__
