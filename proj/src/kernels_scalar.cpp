#include <cmath>

#include "urnn/kernels.hpp"

namespace urnn {
namespace {

void cmul(const double* ar, const double* ai, const double* br,
          const double* bi, double* outr, double* outi, size_t n) {
  for (size_t j = 0; j < n; ++j) {
    const double re = ar[j] * br[j] - ai[j] * bi[j];
    const double im = ar[j] * bi[j] + ai[j] * br[j];
    outr[j] = re;
    outi[j] = im;
  }
}

void cmul_conj(const double* ar, const double* ai, const double* br,
               const double* bi, double* outr, double* outi, size_t n) {
  for (size_t j = 0; j < n; ++j) {
    const double re = ar[j] * br[j] + ai[j] * bi[j];
    const double im = ai[j] * br[j] - ar[j] * bi[j];
    outr[j] = re;
    outi[j] = im;
  }
}

void cdot_conj(const double* vr, const double* vi, const double* xr,
               const double* xi, size_t n, double* out_re, double* out_im) {
  double sre = 0.0, sim = 0.0;
  for (size_t j = 0; j < n; ++j) {
    sre += vr[j] * xr[j] + vi[j] * xi[j];
    sim += vr[j] * xi[j] - vi[j] * xr[j];
  }
  *out_re = sre;
  *out_im = sim;
}

void caxpy(double cr, double ci, const double* vr, const double* vi,
           double* yr, double* yi, size_t n) {
  for (size_t j = 0; j < n; ++j) {
    yr[j] += cr * vr[j] - ci * vi[j];
    yi[j] += cr * vi[j] + ci * vr[j];
  }
}

double dot(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t j = 0; j < n; ++j) s += a[j] * b[j];
  return s;
}

void axpy(double a, const double* x, double* y, size_t n) {
  for (size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void gemv(const double* a, size_t m, size_t n, const double* x, double* y,
          double alpha) {
  for (size_t i = 0; i < m; ++i) {
    const double* row = a + i * n;
    double s = 0.0;
    for (size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] += alpha * s;
  }
}

void gemv_t(const double* a, size_t m, size_t n, const double* x, double* y,
            double alpha) {
  for (size_t i = 0; i < m; ++i) {
    const double* row = a + i * n;
    const double s = alpha * x[i];
    for (size_t j = 0; j < n; ++j) y[j] += s * row[j];
  }
}

void ger(double* a, size_t m, size_t n, const double* x, const double* y,
         double alpha) {
  for (size_t i = 0; i < m; ++i) {
    double* row = a + i * n;
    const double s = alpha * x[i];
    for (size_t j = 0; j < n; ++j) row[j] += s * y[j];
  }
}

void fft_stage(double* re, double* im, const double* twr, const double* twi,
               size_t n, size_t half) {
  for (size_t base = 0; base < n; base += 2 * half) {
    double* re0 = re + base;
    double* im0 = im + base;
    double* re1 = re0 + half;
    double* im1 = im0 + half;
    for (size_t j = 0; j < half; ++j) {
      const double tr = twr[j] * re1[j] - twi[j] * im1[j];
      const double ti = twr[j] * im1[j] + twi[j] * re1[j];
      const double ur = re0[j];
      const double ui = im0[j];
      re0[j] = ur + tr;
      im0[j] = ui + ti;
      re1[j] = ur - tr;
      im1[j] = ui - ti;
    }
  }
}

void modrelu(const double* zr, const double* zi, const double* b, double eps,
             double* hr, double* hi, size_t n) {
  for (size_t j = 0; j < n; ++j) {
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
  for (size_t j = 0; j < n; ++j) {
    const double r = std::sqrt(zr[j] * zr[j] + zi[j] * zi[j]);
    const double m = r + b[j];
    if (m < 0.0) {
      gzr[j] = 0.0;
      gzi[j] = 0.0;
      continue;
    }
    const double d = r + eps;
    const double s = m / d;
    // ds/dr, with the |z| derivative guarded at the origin.
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
  for (size_t j = 0; j < n; ++j) {
    acc[j] = decay * acc[j] + (1.0 - decay) * g[j] * g[j];
    p[j] -= lr * g[j] / (std::sqrt(acc[j]) + eps);
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar", cmul,      cmul_conj, cdot_conj,   caxpy,   dot,
      axpy,     gemv,      gemv_t,    ger,         fft_stage,
      modrelu,  modrelu_vjp, rmsprop,
  };
  return k;
}

}  // namespace urnn
