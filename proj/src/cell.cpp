#include "urnn/cell.hpp"

#include <cmath>
#include <stdexcept>

#include "urnn/kernels.hpp"
#include "urnn/rng.hpp"

namespace urnn {

CVec modrelu(const CVec& z, const std::vector<double>& b, double eps) {
  if (z.size() != b.size()) {
    throw std::invalid_argument("modrelu: dimension mismatch");
  }
  CVec h(z.size());
  kernels().modrelu(z.re.data(), z.im.data(), b.data(), eps, h.re.data(),
                    h.im.data(), z.size());
  return h;
}

std::pair<CVec, std::vector<double>> modrelu_vjp(const CVec& z,
                                                 const std::vector<double>& b,
                                                 const CVec& g, double eps) {
  if (z.size() != b.size() || z.size() != g.size()) {
    throw std::invalid_argument("modrelu_vjp: dimension mismatch");
  }
  CVec gz(z.size());
  std::vector<double> gb(z.size(), 0.0);
  kernels().modrelu_vjp(z.re.data(), z.im.data(), b.data(), eps, g.re.data(),
                        g.im.data(), gz.re.data(), gz.im.data(), gb.data(),
                        z.size());
  return {std::move(gz), std::move(gb)};
}

URNNParams::URNNParams(size_t n_in, size_t n_h, size_t n_o, uint64_t perm_seed)
    : n_in(n_in),
      n_h(n_h),
      n_o(n_o),
      v_in(n_h, n_in),
      w(n_h, perm_seed),
      b(n_h, 0.0),
      u_out(n_o, 2 * n_h),
      b_o(n_o, 0.0),
      h0(n_h) {}

size_t URNNParams::scalar_count() const {
  return 2 * n_h * n_in + 3 * n_h + 4 * n_h + n_h + 2 * n_h * n_o + n_o +
         2 * n_h;
}

UrnnGrads::UrnnGrads(const URNNParams& p)
    : v_in(p.n_h, p.n_in),
      w(p.n_h),
      b(p.n_h, 0.0),
      u_out(p.n_o, 2 * p.n_h),
      b_o(p.n_o, 0.0),
      h0(p.n_h) {}

void UrnnGrads::set_zero() {
  std::fill(v_in.a.begin(), v_in.a.end(), 0.0);
  std::fill(v_in.b.begin(), v_in.b.end(), 0.0);
  w.set_zero();
  std::fill(b.begin(), b.end(), 0.0);
  std::fill(u_out.v.begin(), u_out.v.end(), 0.0);
  std::fill(b_o.begin(), b_o.end(), 0.0);
  h0.set_zero();
}

namespace {

void project_output(const URNNParams& p, const CVec& h, double* out) {
  const Kernels& k = kernels();
  const size_t nh = p.n_h;
  for (size_t i = 0; i < p.n_o; ++i) {
    const double* row = p.u_out.row(i);
    out[i] = p.b_o[i] + k.dot(row, h.re.data(), nh) +
             k.dot(row + nh, h.im.data(), nh);
  }
}

// Accumulates output-map cotangents and adds the hidden-state cotangent
// into gh.
void project_output_vjp(const URNNParams& p, const CVec& h, const double* go,
                        UrnnGrads& grads, CVec& gh) {
  const Kernels& k = kernels();
  const size_t nh = p.n_h;
  for (size_t i = 0; i < p.n_o; ++i) {
    const double gi = go[i];
    if (gi == 0.0) continue;
    double* grow = grads.u_out.row(i);
    k.axpy(gi, h.re.data(), grow, nh);
    k.axpy(gi, h.im.data(), grow + nh, nh);
    const double* row = p.u_out.row(i);
    k.axpy(gi, row, gh.re.data(), nh);
    k.axpy(gi, row + nh, gh.im.data(), nh);
    grads.b_o[i] += gi;
  }
}

void input_map(const URNNParams& p, const double* xt, CVec& acc) {
  // acc += V x with x real.
  const Kernels& k = kernels();
  k.gemv(p.v_in.a.data(), p.n_h, p.n_in, xt, acc.re.data(), 1.0);
  k.gemv(p.v_in.b.data(), p.n_h, p.n_in, xt, acc.im.data(), 1.0);
}

void input_map_vjp(const URNNParams& p, const double* xt, const CVec& gz,
                   UrnnGrads& grads) {
  const Kernels& k = kernels();
  k.ger(grads.v_in.a.data(), p.n_h, p.n_in, gz.re.data(), xt, 1.0);
  k.ger(grads.v_in.b.data(), p.n_h, p.n_in, gz.im.data(), xt, 1.0);
}

}  // namespace

void urnn_forward(const URNNParams& p, const double* x, size_t T,
                  OutputMode mode, Nonlinearity nl, UrnnTape* tape,
                  std::vector<double>& outputs) {
  if (tape) tape->resize(T);
  outputs.assign(mode == OutputMode::kPerStep ? T * p.n_o : p.n_o, 0.0);

  for (size_t j = 0; j < T * p.n_in; ++j) {
    if (!std::isfinite(x[j])) {
      throw std::invalid_argument("urnn_forward: non-finite input");
    }
  }

  CVec z_local, h_local;
  const CVec* h_prev = &p.h0;
  for (size_t t = 0; t < T; ++t) {
    CVec& zt = tape ? tape->z[t] : z_local;
    CVec& ht = tape ? tape->h[t] : h_local;
    zt = apply_composition(p.w, *h_prev, tape ? &tape->comp[t] : nullptr);
    input_map(p, x + t * p.n_in, zt);
    if (nl == Nonlinearity::kModRelu) {
      ht = modrelu(zt, p.b);
    } else {
      ht = zt;
    }
    h_prev = &ht;
    if (mode == OutputMode::kPerStep) {
      project_output(p, ht, outputs.data() + t * p.n_o);
    }
  }
  if (mode == OutputMode::kFinalStep) {
    project_output(p, *h_prev, outputs.data());
  }
}

void urnn_bptt(const URNNParams& p, const double* x, size_t T,
               OutputMode mode, Nonlinearity nl, const UrnnTape& tape,
               const std::vector<double>& dout, UrnnGrads& grads,
               std::vector<double>* probe_norms) {
  const size_t expected =
      mode == OutputMode::kPerStep ? T * p.n_o : p.n_o;
  if (tape.h.size() != T || dout.size() != expected) {
    throw std::invalid_argument("urnn_bptt: tape/cotangent mismatch");
  }
  if (probe_norms) probe_norms->assign(T, 0.0);

  CVec gh(p.n_h);
  if (T == 0) {
    if (mode == OutputMode::kFinalStep) {
      project_output_vjp(p, p.h0, dout.data(), grads, gh);
    }
    kernels().axpy(1.0, gh.re.data(), grads.h0.re.data(), p.n_h);
    kernels().axpy(1.0, gh.im.data(), grads.h0.im.data(), p.n_h);
    return;
  }

  CVec gz(p.n_h);
  for (size_t t = T; t-- > 0;) {
    if (mode == OutputMode::kPerStep) {
      project_output_vjp(p, tape.h[t], dout.data() + t * p.n_o, grads, gh);
    } else if (t == T - 1) {
      project_output_vjp(p, tape.h[t], dout.data(), grads, gh);
    }
    if (probe_norms) (*probe_norms)[t] = cnorm(gh);

    if (nl == Nonlinearity::kModRelu) {
      kernels().modrelu_vjp(tape.z[t].re.data(), tape.z[t].im.data(),
                            p.b.data(), kModReluEps, gh.re.data(),
                            gh.im.data(), gz.re.data(), gz.im.data(),
                            grads.b.data(), p.n_h);
    } else {
      gz = gh;
    }
    input_map_vjp(p, x + t * p.n_in, gz, grads);
    const CVec& h_prev = t == 0 ? p.h0 : tape.h[t - 1];
    gh = composition_vjp(p.w, h_prev, tape.comp[t], gz, grads.w);
  }
  kernels().axpy(1.0, gh.re.data(), grads.h0.re.data(), p.n_h);
  kernels().axpy(1.0, gh.im.data(), grads.h0.im.data(), p.n_h);
}

LossGrad cross_entropy_per_step(const std::vector<double>& outputs,
                                const std::vector<int>& targets, size_t n_o) {
  const size_t T = targets.size();
  if (outputs.size() != T * n_o) {
    throw std::invalid_argument("cross_entropy_per_step: shape mismatch");
  }
  LossGrad lg;
  lg.dout.assign(T * n_o, 0.0);
  const double inv_t = T > 0 ? 1.0 / static_cast<double>(T) : 0.0;
  for (size_t t = 0; t < T; ++t) {
    const int target = targets[t];
    if (target < 0 || static_cast<size_t>(target) >= n_o) {
      throw std::out_of_range("cross_entropy_per_step: target out of range");
    }
    const double* o = outputs.data() + t * n_o;
    double* d = lg.dout.data() + t * n_o;
    double mx = o[0];
    for (size_t j = 1; j < n_o; ++j) mx = std::max(mx, o[j]);
    double sum = 0.0;
    for (size_t j = 0; j < n_o; ++j) sum += std::exp(o[j] - mx);
    const double logsum = mx + std::log(sum);
    lg.loss += (logsum - o[target]) * inv_t;
    for (size_t j = 0; j < n_o; ++j) {
      d[j] = std::exp(o[j] - logsum) * inv_t;
    }
    d[target] -= inv_t;
  }
  return lg;
}

LossGrad cross_entropy_final(const std::vector<double>& output, int target) {
  std::vector<int> tv = {target};
  return cross_entropy_per_step(output, tv, output.size());
}

LossGrad mse_final(double output, double target) {
  LossGrad lg;
  const double e = output - target;
  lg.loss = e * e;
  lg.dout = {2.0 * e};
  return lg;
}

}  // namespace urnn
