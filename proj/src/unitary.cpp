#include "urnn/unitary.hpp"

#include <cmath>
#include <stdexcept>

#include "urnn/kernels.hpp"
#include "urnn/rng.hpp"

namespace urnn {

void DiagonalPhase::refresh() {
  const size_t n = w.size();
  cosw.resize(n);
  sinw.resize(n);
  for (size_t j = 0; j < n; ++j) {
    cosw[j] = std::cos(w[j]);
    sinw[j] = std::sin(w[j]);
  }
}

FixedPermutation FixedPermutation::sample(size_t n, uint64_t seed) {
  FixedPermutation p;
  p.seed = seed;
  p.indices = random_permutation(n, seed);
  p.inverse.resize(n);
  for (size_t j = 0; j < n; ++j) p.inverse[p.indices[j]] = static_cast<uint32_t>(j);
  return p;
}

FixedPermutation FixedPermutation::identity(size_t n) {
  FixedPermutation p;
  p.indices.resize(n);
  p.inverse.resize(n);
  for (size_t j = 0; j < n; ++j) {
    p.indices[j] = static_cast<uint32_t>(j);
    p.inverse[j] = static_cast<uint32_t>(j);
  }
  return p;
}

namespace {

void check_size(size_t a, size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace

CVec apply_diag(const DiagonalPhase& d, const CVec& x) {
  check_size(d.size(), x.size(), "apply_diag");
  CVec y(x.size());
  kernels().cmul(x.re.data(), x.im.data(), d.cosw.data(), d.sinw.data(),
                 y.re.data(), y.im.data(), x.size());
  return y;
}

CVec apply_reflection(const Reflection& r, const CVec& x) {
  check_size(r.size(), x.size(), "apply_reflection");
  const double n2 = cnorm2(r.v);
  if (n2 <= 0.0) {
    throw std::invalid_argument("apply_reflection: zero reflection vector");
  }
  const Kernels& k = kernels();
  double sre, sim;
  k.cdot_conj(r.v.re.data(), r.v.im.data(), x.re.data(), x.im.data(), x.size(),
              &sre, &sim);
  const double cr = 2.0 * sre / n2;
  const double ci = 2.0 * sim / n2;
  CVec y = x;
  k.caxpy(-cr, -ci, r.v.re.data(), r.v.im.data(), y.re.data(), y.im.data(),
          x.size());
  return y;
}

CVec apply_permutation(const FixedPermutation& p, const CVec& x) {
  check_size(p.size(), x.size(), "apply_permutation");
  CVec y(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    y.re[j] = x.re[p.indices[j]];
    y.im[j] = x.im[p.indices[j]];
  }
  return y;
}

CVec apply_permutation_inverse(const FixedPermutation& p, const CVec& x) {
  check_size(p.size(), x.size(), "apply_permutation_inverse");
  CVec y(x.size());
  for (size_t j = 0; j < x.size(); ++j) {
    y.re[j] = x.re[p.inverse[j]];
    y.im[j] = x.im[p.inverse[j]];
  }
  return y;
}

UnitaryComposition::UnitaryComposition(size_t n, uint64_t perm_seed)
    : n(n),
      d1(n),
      d2(n),
      d3(n),
      r1(n),
      r2(n),
      perm(FixedPermutation::sample(n, perm_seed)),
      fft(n) {}

void CompositionGrads::set_zero() {
  std::fill(dw1.begin(), dw1.end(), 0.0);
  std::fill(dw2.begin(), dw2.end(), 0.0);
  std::fill(dw3.begin(), dw3.end(), 0.0);
  dv1.set_zero();
  dv2.set_zero();
}

CVec apply_composition(const UnitaryComposition& c, const CVec& x,
                       CompositionTape* tape) {
  check_size(c.n, x.size(), "apply_composition");
  CVec t = apply_diag(c.d1, x);
  if (tape) tape->stage_in[0] = t;
  c.fft.forward(t.re.data(), t.im.data());
  if (tape) tape->stage_in[1] = t;
  t = apply_reflection(c.r1, t);
  if (tape) tape->stage_in[2] = t;
  t = apply_permutation(c.perm, t);
  if (tape) tape->stage_in[3] = t;
  t = apply_diag(c.d2, t);
  if (tape) tape->stage_in[4] = t;
  c.fft.inverse(t.re.data(), t.im.data());
  if (tape) tape->stage_in[5] = t;
  t = apply_reflection(c.r2, t);
  if (tape) tape->stage_in[6] = t;
  t = apply_diag(c.d3, t);
  return t;
}

namespace {

// d(e^{iw} x)/dw = i e^{iw} x: accumulate Re(conj(g) * i * out) per entry.
void diag_param_grad(const DiagonalPhase& d, const CVec& stage_in,
                     const CVec& g, std::vector<double>& dw) {
  const size_t n = d.size();
  CVec out(n);
  kernels().cmul(stage_in.re.data(), stage_in.im.data(), d.cosw.data(),
                 d.sinw.data(), out.re.data(), out.im.data(), n);
  for (size_t j = 0; j < n; ++j) {
    dw[j] += g.im[j] * out.re[j] - g.re[j] * out.im[j];
  }
}

// Cotangent of out = x - (2<v,x>/||v||^2) v with respect to the real and
// imaginary parts of v, packed as a complex vector:
//   grad_v = -(2/N) [ T x - Re(c T) v ] - conj(c) g,
// with N = ||v||^2, s = <v,x>, c = 2s/N, T = sum_j conj(g_j) v_j.
void reflection_param_grad(const Reflection& r, const CVec& x, const CVec& g,
                           CVec& dv) {
  const Kernels& k = kernels();
  const size_t n = x.size();
  const double n2 = cnorm2(r.v);
  double sre, sim;
  k.cdot_conj(r.v.re.data(), r.v.im.data(), x.re.data(), x.im.data(), n, &sre,
              &sim);
  const double cr = 2.0 * sre / n2;
  const double ci = 2.0 * sim / n2;
  double tre, tim;
  k.cdot_conj(g.re.data(), g.im.data(), r.v.re.data(), r.v.im.data(), n, &tre,
              &tim);
  const double re_ct = cr * tre - ci * tim;
  const double a = 2.0 / n2;
  k.caxpy(-a * tre, -a * tim, x.re.data(), x.im.data(), dv.re.data(),
          dv.im.data(), n);
  k.caxpy(a * re_ct, 0.0, r.v.re.data(), r.v.im.data(), dv.re.data(),
          dv.im.data(), n);
  k.caxpy(-cr, ci, g.re.data(), g.im.data(), dv.re.data(), dv.im.data(), n);
}

CVec diag_input_grad(const DiagonalPhase& d, const CVec& g) {
  CVec out(g.size());
  kernels().cmul_conj(g.re.data(), g.im.data(), d.cosw.data(), d.sinw.data(),
                      out.re.data(), out.im.data(), g.size());
  return out;
}

}  // namespace

CVec composition_vjp(const UnitaryComposition& c, const CVec& x,
                     const CompositionTape& tape, const CVec& g,
                     CompositionGrads& grads) {
  check_size(c.n, x.size(), "composition_vjp");
  check_size(c.n, g.size(), "composition_vjp");

  CVec ct = g;
  diag_param_grad(c.d3, tape.stage_in[6], ct, grads.dw3);
  ct = diag_input_grad(c.d3, ct);
  reflection_param_grad(c.r2, tape.stage_in[5], ct, grads.dv2);
  ct = apply_reflection(c.r2, ct);
  c.fft.forward(ct.re.data(), ct.im.data());  // adjoint of the F^-1 stage
  diag_param_grad(c.d2, tape.stage_in[3], ct, grads.dw2);
  ct = diag_input_grad(c.d2, ct);
  ct = apply_permutation_inverse(c.perm, ct);
  reflection_param_grad(c.r1, tape.stage_in[1], ct, grads.dv1);
  ct = apply_reflection(c.r1, ct);
  c.fft.inverse(ct.re.data(), ct.im.data());  // adjoint of the F stage
  diag_param_grad(c.d1, x, ct, grads.dw1);
  ct = diag_input_grad(c.d1, ct);
  return ct;
}

CMat materialize(const UnitaryComposition& c) {
  if (c.n > 64) {
    throw std::invalid_argument("materialize: n > 64 size guard");
  }
  CMat m(c.n, c.n);
  CVec e(c.n);
  for (size_t j = 0; j < c.n; ++j) {
    e.set_zero();
    e.re[j] = 1.0;
    const CVec col = apply_composition(c, e);
    for (size_t i = 0; i < c.n; ++i) {
      m.a[i * c.n + j] = col.re[i];
      m.b[i * c.n + j] = col.im[i];
    }
  }
  return m;
}

}  // namespace urnn
