// Scalar/SIMD kernel equivalence and unit checks.

#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "urnn/kernels.hpp"
#include "urnn/rng.hpp"

using namespace urnn;

namespace {

std::vector<double> rand_vec(size_t n, Rng& rng, double lo = -1.0,
                             double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

double max_abs_diff(const std::vector<double>& a,
                    const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

}  // namespace

TEST_CASE("scalar kernels: basic identities") {
  const Kernels& k = scalar_kernels();
  std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
  CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(32.0));

  std::vector<double> y = {0, 0, 0};
  k.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{2, 4, 6});

  // (1+2i)*(3+4i) = -5 + 10i
  double ar = 1, ai = 2, br = 3, bi = 4, outr, outi;
  k.cmul(&ar, &ai, &br, &bi, &outr, &outi, 1);
  CHECK(outr == doctest::Approx(-5.0));
  CHECK(outi == doctest::Approx(10.0));
  // (1+2i)*conj(3+4i) = 11 + 2i
  k.cmul_conj(&ar, &ai, &br, &bi, &outr, &outi, 1);
  CHECK(outr == doctest::Approx(11.0));
  CHECK(outi == doctest::Approx(2.0));
  // conj(1+2i)*(3+4i) = 11 - 2i... conj on the first argument
  k.cdot_conj(&ar, &ai, &br, &bi, 1, &outr, &outi);
  CHECK(outr == doctest::Approx(11.0));
  CHECK(outi == doctest::Approx(-2.0));
}

TEST_CASE("scalar gemv/gemv_t/ger agree with hand-rolled loops") {
  Rng rng(7);
  const size_t m = 5, n = 3;
  auto A = rand_vec(m * n, rng);
  auto x = rand_vec(n, rng);
  auto xm = rand_vec(m, rng);
  const Kernels& k = scalar_kernels();

  std::vector<double> y(m, 0.0), yref(m, 0.0);
  k.gemv(A.data(), m, n, x.data(), y.data(), 2.0);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) yref[i] += 2.0 * A[i * n + j] * x[j];
  }
  CHECK(max_abs_diff(y, yref) < 1e-15);

  std::vector<double> z(n, 0.0), zref(n, 0.0);
  k.gemv_t(A.data(), m, n, xm.data(), z.data(), -1.5);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) zref[j] += -1.5 * A[i * n + j] * xm[i];
  }
  CHECK(max_abs_diff(z, zref) < 1e-15);

  auto G = rand_vec(m * n, rng);
  auto Gref = G;
  k.ger(G.data(), m, n, xm.data(), x.data(), 0.7);
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) Gref[i * n + j] += 0.7 * xm[i] * x[j];
  }
  CHECK(max_abs_diff(G, Gref) < 1e-15);
}

TEST_CASE("modrelu kernel: magnitude law and dead zone") {
  const Kernels& k = scalar_kernels();
  const double eps = 1e-5;
  // |3+4i| = 5, b = -6: dead.
  double zr = 3, zi = 4, b = -6, hr, hi;
  k.modrelu(&zr, &zi, &b, eps, &hr, &hi, 1);
  CHECK(hr == 0.0);
  CHECK(hi == 0.0);
  // b = 0.5 scales modulus to 5.5.
  b = 0.5;
  k.modrelu(&zr, &zi, &b, eps, &hr, &hi, 1);
  CHECK(std::hypot(hr, hi) == doctest::Approx(5.5).epsilon(1e-4));
  // Phase preserved.
  CHECK(std::atan2(hi, hr) == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("avx2 kernels match scalar" *
          doctest::skip(avx2_kernels() == nullptr)) {
  const Kernels* simd = avx2_kernels();
  REQUIRE(simd != nullptr);
  const Kernels& ref = scalar_kernels();
  Rng rng(99);

  for (size_t n : {1u, 3u, 4u, 7u, 8u, 64u, 129u}) {
    auto ar = rand_vec(n, rng), ai = rand_vec(n, rng);
    auto br = rand_vec(n, rng), bi = rand_vec(n, rng);

    std::vector<double> r1(n), i1(n), r2(n), i2(n);
    ref.cmul(ar.data(), ai.data(), br.data(), bi.data(), r1.data(), i1.data(),
             n);
    simd->cmul(ar.data(), ai.data(), br.data(), bi.data(), r2.data(),
               i2.data(), n);
    CHECK(max_abs_diff(r1, r2) < 1e-14);
    CHECK(max_abs_diff(i1, i2) < 1e-14);

    ref.cmul_conj(ar.data(), ai.data(), br.data(), bi.data(), r1.data(),
                  i1.data(), n);
    simd->cmul_conj(ar.data(), ai.data(), br.data(), bi.data(), r2.data(),
                    i2.data(), n);
    CHECK(max_abs_diff(r1, r2) < 1e-14);
    CHECK(max_abs_diff(i1, i2) < 1e-14);

    double s1r, s1i, s2r, s2i;
    ref.cdot_conj(ar.data(), ai.data(), br.data(), bi.data(), n, &s1r, &s1i);
    simd->cdot_conj(ar.data(), ai.data(), br.data(), bi.data(), n, &s2r,
                    &s2i);
    CHECK(s1r == doctest::Approx(s2r).epsilon(1e-12));
    CHECK(s1i == doctest::Approx(s2i).epsilon(1e-12));

    auto y1 = rand_vec(n, rng), y1i = rand_vec(n, rng);
    auto y2 = y1, y2i = y1i;
    ref.caxpy(0.3, -0.8, ar.data(), ai.data(), y1.data(), y1i.data(), n);
    simd->caxpy(0.3, -0.8, ar.data(), ai.data(), y2.data(), y2i.data(), n);
    CHECK(max_abs_diff(y1, y2) < 1e-14);
    CHECK(max_abs_diff(y1i, y2i) < 1e-14);

    CHECK(ref.dot(ar.data(), br.data(), n) ==
          doctest::Approx(simd->dot(ar.data(), br.data(), n)).epsilon(1e-12));
  }

  SUBCASE("gemv family") {
    const size_t m = 13, n = 37;
    auto A = rand_vec(m * n, rng);
    auto x = rand_vec(n, rng);
    auto xm = rand_vec(m, rng);
    std::vector<double> y1(m, 0.1), y2(m, 0.1);
    ref.gemv(A.data(), m, n, x.data(), y1.data(), 1.7);
    simd->gemv(A.data(), m, n, x.data(), y2.data(), 1.7);
    CHECK(max_abs_diff(y1, y2) < 1e-13);

    std::vector<double> z1(n, -0.2), z2(n, -0.2);
    ref.gemv_t(A.data(), m, n, xm.data(), z1.data(), 0.9);
    simd->gemv_t(A.data(), m, n, xm.data(), z2.data(), 0.9);
    CHECK(max_abs_diff(z1, z2) < 1e-13);

    auto G1 = rand_vec(m * n, rng);
    auto G2 = G1;
    ref.ger(G1.data(), m, n, xm.data(), x.data(), -1.1);
    simd->ger(G2.data(), m, n, xm.data(), x.data(), -1.1);
    CHECK(max_abs_diff(G1, G2) < 1e-13);
  }

  SUBCASE("fft stage") {
    for (size_t half : {1u, 2u, 4u, 8u, 32u}) {
      const size_t n = half * 4;
      auto re1 = rand_vec(n, rng), im1 = rand_vec(n, rng);
      auto re2 = re1, im2 = im1;
      auto twr = rand_vec(half, rng), twi = rand_vec(half, rng);
      ref.fft_stage(re1.data(), im1.data(), twr.data(), twi.data(), n, half);
      simd->fft_stage(re2.data(), im2.data(), twr.data(), twi.data(), n,
                      half);
      CHECK(max_abs_diff(re1, re2) < 1e-14);
      CHECK(max_abs_diff(im1, im2) < 1e-14);
    }
  }

  SUBCASE("modrelu forward/backward") {
    const size_t n = 67;
    auto zr = rand_vec(n, rng), zi = rand_vec(n, rng);
    auto b = rand_vec(n, rng, -1.2, 0.8);
    zr[5] = 0.0;
    zi[5] = 0.0;  // origin case
    std::vector<double> h1r(n), h1i(n), h2r(n), h2i(n);
    ref.modrelu(zr.data(), zi.data(), b.data(), 1e-5, h1r.data(), h1i.data(),
                n);
    simd->modrelu(zr.data(), zi.data(), b.data(), 1e-5, h2r.data(),
                  h2i.data(), n);
    CHECK(max_abs_diff(h1r, h2r) < 1e-14);
    CHECK(max_abs_diff(h1i, h2i) < 1e-14);

    auto gr = rand_vec(n, rng), gi = rand_vec(n, rng);
    std::vector<double> gz1r(n), gz1i(n), gb1(n, 0.5);
    std::vector<double> gz2r(n), gz2i(n), gb2(n, 0.5);
    ref.modrelu_vjp(zr.data(), zi.data(), b.data(), 1e-5, gr.data(),
                    gi.data(), gz1r.data(), gz1i.data(), gb1.data(), n);
    simd->modrelu_vjp(zr.data(), zi.data(), b.data(), 1e-5, gr.data(),
                      gi.data(), gz2r.data(), gz2i.data(), gb2.data(), n);
    CHECK(max_abs_diff(gz1r, gz2r) < 1e-13);
    CHECK(max_abs_diff(gz1i, gz2i) < 1e-13);
    CHECK(max_abs_diff(gb1, gb2) < 1e-13);
  }

  SUBCASE("rmsprop") {
    const size_t n = 43;
    auto p1 = rand_vec(n, rng), acc1 = rand_vec(n, rng, 0.0, 1.0);
    auto g = rand_vec(n, rng);
    auto p2 = p1, acc2 = acc1;
    ref.rmsprop(p1.data(), acc1.data(), g.data(), n, 1e-3, 0.9, 1e-8);
    simd->rmsprop(p2.data(), acc2.data(), g.data(), n, 1e-3, 0.9, 1e-8);
    CHECK(max_abs_diff(p1, p2) < 1e-15);
    CHECK(max_abs_diff(acc1, acc2) < 1e-15);
  }
}

TEST_CASE("active kernel table is one of the known tables") {
  const Kernels& k = kernels();
  const bool known = std::string(k.name) == "scalar" ||
                     std::string(k.name) == "avx2";
  CHECK(known);
}
