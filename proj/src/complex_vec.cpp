#include "urnn/complex_vec.hpp"

#include <cmath>
#include <stdexcept>

#include "urnn/kernels.hpp"

namespace urnn {

double cnorm2(const CVec& x) {
  const Kernels& k = kernels();
  const size_t n = x.size();
  return k.dot(x.re.data(), x.re.data(), n) +
         k.dot(x.im.data(), x.im.data(), n);
}

double cnorm(const CVec& x) { return std::sqrt(cnorm2(x)); }

CVec complex_matvec(const CMat& m, const CVec& x) {
  if (x.size() != m.cols) {
    throw std::invalid_argument("complex_matvec: dimension mismatch");
  }
  const Kernels& k = kernels();
  CVec y(m.rows);
  k.gemv(m.a.data(), m.rows, m.cols, x.re.data(), y.re.data(), 1.0);
  k.gemv(m.b.data(), m.rows, m.cols, x.im.data(), y.re.data(), -1.0);
  k.gemv(m.a.data(), m.rows, m.cols, x.im.data(), y.im.data(), 1.0);
  k.gemv(m.b.data(), m.rows, m.cols, x.re.data(), y.im.data(), 1.0);
  return y;
}

CVec complex_matvec_vjp(const CMat& m, const CVec& x, const CVec& g,
                        CMat& grad_m) {
  if (x.size() != m.cols || g.size() != m.rows ||
      grad_m.rows != m.rows || grad_m.cols != m.cols) {
    throw std::invalid_argument("complex_matvec_vjp: dimension mismatch");
  }
  const Kernels& k = kernels();
  CVec gx(m.cols);
  k.gemv_t(m.a.data(), m.rows, m.cols, g.re.data(), gx.re.data(), 1.0);
  k.gemv_t(m.b.data(), m.rows, m.cols, g.im.data(), gx.re.data(), 1.0);
  k.gemv_t(m.a.data(), m.rows, m.cols, g.im.data(), gx.im.data(), 1.0);
  k.gemv_t(m.b.data(), m.rows, m.cols, g.re.data(), gx.im.data(), -1.0);
  k.ger(grad_m.a.data(), m.rows, m.cols, g.re.data(), x.re.data(), 1.0);
  k.ger(grad_m.a.data(), m.rows, m.cols, g.im.data(), x.im.data(), 1.0);
  k.ger(grad_m.b.data(), m.rows, m.cols, g.re.data(), x.im.data(), -1.0);
  k.ger(grad_m.b.data(), m.rows, m.cols, g.im.data(), x.re.data(), 1.0);
  return gx;
}

}  // namespace urnn
