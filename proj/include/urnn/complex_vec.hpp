#pragma once

#include <cstddef>
#include <vector>

namespace urnn {

// Length-n complex vector stored as split re/im arrays.
struct CVec {
  std::vector<double> re, im;

  CVec() = default;
  explicit CVec(size_t n) : re(n, 0.0), im(n, 0.0) {}

  size_t size() const { return re.size(); }
  void assign_zero(size_t n) {
    re.assign(n, 0.0);
    im.assign(n, 0.0);
  }
  void set_zero() {
    re.assign(re.size(), 0.0);
    im.assign(im.size(), 0.0);
  }
};

// Complex matrix W = A + iB, both parts row-major rows x cols.
struct CMat {
  size_t rows = 0, cols = 0;
  std::vector<double> a, b;

  CMat() = default;
  CMat(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0), b(r * c, 0.0) {}
};

// Real row-major matrix.
struct RealMat {
  size_t rows = 0, cols = 0;
  std::vector<double> v;

  RealMat() = default;
  RealMat(size_t r, size_t c) : rows(r), cols(c), v(r * c, 0.0) {}

  double* row(size_t i) { return v.data() + i * cols; }
  const double* row(size_t i) const { return v.data() + i * cols; }
};

// L2 norm of the stacked (Re, Im) representation.
double cnorm(const CVec& x);

// Squared L2 norm.
double cnorm2(const CVec& x);

// y = m x over the complex field; throws on dimension mismatch.
CVec complex_matvec(const CMat& m, const CVec& x);

// Cotangent pull-back of y = m x for a real loss. grad wrt x is m* g;
// grad_a += g.re x.re^T + g.im x.im^T, grad_b += -g.re x.im^T + g.im x.re^T.
CVec complex_matvec_vjp(const CMat& m, const CVec& x, const CVec& g,
                        CMat& grad_m);

}  // namespace urnn
