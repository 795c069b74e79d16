#include "urnn/models.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "urnn/kernels.hpp"

namespace urnn {

OutputMode task_output_mode(TaskKind kind) {
  return kind == TaskKind::kCopy ? OutputMode::kPerStep
                                 : OutputMode::kFinalStep;
}

LossGrad sequence_loss(const TaskBatch& tb, size_t e,
                       const std::vector<double>& outputs) {
  switch (tb.kind) {
    case TaskKind::kCopy: {
      std::vector<int> targets(tb.int_targets.begin() + e * tb.T,
                               tb.int_targets.begin() + (e + 1) * tb.T);
      return cross_entropy_per_step(outputs, targets, tb.n_o);
    }
    case TaskKind::kAdding:
      return mse_final(outputs[0], tb.real_targets[e]);
    case TaskKind::kClassify:
      return cross_entropy_final(outputs, tb.int_targets[e]);
  }
  throw std::logic_error("sequence_loss: bad task kind");
}

void MetricAccum::add(const TaskBatch& tb, size_t e,
                      const std::vector<double>& outputs) {
  auto argmax = [&](const double* o) {
    size_t best = 0;
    for (size_t j = 1; j < tb.n_o; ++j) {
      if (o[j] > o[best]) best = j;
    }
    return static_cast<int>(best);
  };
  switch (tb.kind) {
    case TaskKind::kCopy: {
      // Recall accuracy over the 10 positions after the delimiter.
      const int* tgt = tb.int_targets.data() + e * tb.T;
      for (size_t t = tb.T - 10; t < tb.T; ++t) {
        correct += argmax(outputs.data() + t * tb.n_o) == tgt[t] ? 1.0 : 0.0;
        total += 1.0;
      }
      break;
    }
    case TaskKind::kAdding: {
      const double err = outputs[0] - tb.real_targets[e];
      correct += err * err;
      total += 1.0;
      break;
    }
    case TaskKind::kClassify:
      correct += argmax(outputs.data()) == tb.int_targets[e] ? 1.0 : 0.0;
      total += 1.0;
      break;
  }
}

namespace {

using Span = std::pair<double*, size_t>;

void flat_copy_out(const std::vector<Span>& spans, double* out) {
  for (const auto& [ptr, n] : spans) {
    std::memcpy(out, ptr, n * sizeof(double));
    out += n;
  }
}

void flat_copy_in(const std::vector<Span>& spans, const double* in) {
  for (const auto& [ptr, n] : spans) {
    std::memcpy(ptr, in, n * sizeof(double));
    in += n;
  }
}

size_t spans_size(const std::vector<Span>& spans) {
  size_t s = 0;
  for (const auto& sp : spans) s += sp.second;
  return s;
}

void check_batch(const TaskBatch& tb, size_t n_in, size_t n_o,
                 const char* who) {
  if (tb.n_in != n_in || tb.n_o != n_o) {
    throw std::invalid_argument(std::string(who) +
                                ": batch dims do not match model");
  }
}

}  // namespace

// --- UrnnModel --------------------------------------------------------------

UrnnModel::UrnnModel(size_t n_in, size_t n_h, size_t n_o, uint64_t perm_seed)
    : p_(n_in, n_h, n_o, perm_seed), scratch_(p_) {}

namespace {

std::vector<Span> urnn_spans(URNNParams& p) {
  return {
      {p.v_in.a.data(), p.v_in.a.size()},
      {p.v_in.b.data(), p.v_in.b.size()},
      {p.w.d1.w.data(), p.w.d1.w.size()},
      {p.w.d2.w.data(), p.w.d2.w.size()},
      {p.w.d3.w.data(), p.w.d3.w.size()},
      {p.w.r1.v.re.data(), p.w.r1.v.re.size()},
      {p.w.r1.v.im.data(), p.w.r1.v.im.size()},
      {p.w.r2.v.re.data(), p.w.r2.v.re.size()},
      {p.w.r2.v.im.data(), p.w.r2.v.im.size()},
      {p.b.data(), p.b.size()},
      {p.u_out.v.data(), p.u_out.v.size()},
      {p.b_o.data(), p.b_o.size()},
      {p.h0.re.data(), p.h0.re.size()},
      {p.h0.im.data(), p.h0.im.size()},
  };
}

std::vector<Span> urnn_grad_spans(UrnnGrads& g) {
  return {
      {g.v_in.a.data(), g.v_in.a.size()},
      {g.v_in.b.data(), g.v_in.b.size()},
      {g.w.dw1.data(), g.w.dw1.size()},
      {g.w.dw2.data(), g.w.dw2.size()},
      {g.w.dw3.data(), g.w.dw3.size()},
      {g.w.dv1.re.data(), g.w.dv1.re.size()},
      {g.w.dv1.im.data(), g.w.dv1.im.size()},
      {g.w.dv2.re.data(), g.w.dv2.re.size()},
      {g.w.dv2.im.data(), g.w.dv2.im.size()},
      {g.b.data(), g.b.size()},
      {g.u_out.v.data(), g.u_out.v.size()},
      {g.b_o.data(), g.b_o.size()},
      {g.h0.re.data(), g.h0.re.size()},
      {g.h0.im.data(), g.h0.im.size()},
  };
}

}  // namespace

size_t UrnnModel::flat_size() const { return p_.scalar_count(); }

std::vector<TensorSpec> UrnnModel::groups() const {
  const uint64_t nh = p_.n_h, ni = p_.n_in, no = p_.n_o;
  return {
      {"v_in.a", {nh, ni}, nh * ni},
      {"v_in.b", {nh, ni}, nh * ni},
      {"w.d1", {nh}, nh},
      {"w.d2", {nh}, nh},
      {"w.d3", {nh}, nh},
      {"w.r1.re", {nh}, nh},
      {"w.r1.im", {nh}, nh},
      {"w.r2.re", {nh}, nh},
      {"w.r2.im", {nh}, nh},
      {"b", {nh}, nh},
      {"u_out", {no, 2 * nh}, no * 2 * nh},
      {"b_o", {no}, no},
      {"h0.re", {nh}, nh},
      {"h0.im", {nh}, nh},
  };
}

void UrnnModel::to_flat(double* out) const {
  flat_copy_out(urnn_spans(const_cast<UrnnModel*>(this)->p_), out);
}

void UrnnModel::from_flat(const double* in) {
  flat_copy_in(urnn_spans(p_), in);
  p_.refresh();
}

double UrnnModel::batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                             std::vector<double>* probe) {
  check_batch(tb, p_.n_in, p_.n_o, "UrnnModel::batch_grad");
  const OutputMode mode = task_output_mode(tb.kind);
  scratch_.set_zero();
  if (probe) probe->assign(tb.T, 0.0);

  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  std::vector<double> outputs, elem_probe;
  for (size_t e = 0; e < tb.batch; ++e) {
    urnn_forward(p_, tb.seq(e), tb.T, mode, nl_, &tape_, outputs);
    LossGrad lg = sequence_loss(tb, e, outputs);
    loss += lg.loss * inv_b;
    for (double& d : lg.dout) d *= inv_b;
    urnn_bptt(p_, tb.seq(e), tb.T, mode, nl_, tape_, lg.dout, scratch_,
              probe ? &elem_probe : nullptr);
    if (probe) {
      for (size_t t = 0; t < tb.T; ++t) (*probe)[t] += elem_probe[t] * inv_b;
    }
  }
  grad.resize(flat_size());
  flat_copy_out(urnn_grad_spans(scratch_), grad.data());
  return loss;
}

double UrnnModel::evaluate(const TaskBatch& tb, double* metric) const {
  check_batch(tb, p_.n_in, p_.n_o, "UrnnModel::evaluate");
  const OutputMode mode = task_output_mode(tb.kind);
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  MetricAccum acc;
  std::vector<double> outputs;
  for (size_t e = 0; e < tb.batch; ++e) {
    urnn_forward(p_, tb.seq(e), tb.T, mode, nl_, nullptr, outputs);
    loss += sequence_loss(tb, e, outputs).loss * inv_b;
    acc.add(tb, e, outputs);
  }
  if (metric) *metric = acc.value();
  return loss;
}

void UrnnModel::hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                             std::vector<double>& dist_to_final) const {
  check_batch(tb, p_.n_in, p_.n_o, "UrnnModel::hidden_norms");
  norms.assign(tb.T, 0.0);
  dist_to_final.assign(tb.T, 0.0);
  if (tb.T == 0) return;
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  UrnnTape tape;
  std::vector<double> outputs;
  CVec diff(p_.n_h);
  for (size_t e = 0; e < tb.batch; ++e) {
    urnn_forward(p_, tb.seq(e), tb.T, task_output_mode(tb.kind), nl_, &tape,
                 outputs);
    const CVec& last = tape.h[tb.T - 1];
    for (size_t t = 0; t < tb.T; ++t) {
      norms[t] += cnorm(tape.h[t]) * inv_b;
      for (size_t j = 0; j < p_.n_h; ++j) {
        diff.re[j] = tape.h[t].re[j] - last.re[j];
        diff.im[j] = tape.h[t].im[j] - last.im[j];
      }
      dist_to_final[t] += cnorm(diff) * inv_b;
    }
  }
}

// --- RnnModel ---------------------------------------------------------------

RnnModel::RnnModel(size_t n_in, size_t n_h, size_t n_o, RnnActivation act)
    : p_(n_in, n_h, n_o, act) {}

namespace {

std::vector<Span> rnn_spans(RNNParams& p) {
  return {
      {p.w_hh.v.data(), p.w_hh.v.size()},
      {p.w_xh.v.data(), p.w_xh.v.size()},
      {p.b_h.data(), p.b_h.size()},
      {p.h0.data(), p.h0.size()},
      {p.u_out.v.data(), p.u_out.v.size()},
      {p.b_o.data(), p.b_o.size()},
  };
}

struct RnnGrads {
  RealMat w_hh, w_xh;
  std::vector<double> b_h, h0;
  RealMat u_out;
  std::vector<double> b_o;

  explicit RnnGrads(const RNNParams& p)
      : w_hh(p.n_h, p.n_h),
        w_xh(p.n_h, p.n_in),
        b_h(p.n_h, 0.0),
        h0(p.n_h, 0.0),
        u_out(p.n_o, p.n_h),
        b_o(p.n_o, 0.0) {}
};

std::vector<Span> rnn_grad_spans(RnnGrads& g) {
  return {
      {g.w_hh.v.data(), g.w_hh.v.size()},
      {g.w_xh.v.data(), g.w_xh.v.size()},
      {g.b_h.data(), g.b_h.size()},
      {g.h0.data(), g.h0.size()},
      {g.u_out.v.data(), g.u_out.v.size()},
      {g.b_o.data(), g.b_o.size()},
  };
}

void rnn_forward_seq(const RNNParams& p, const double* x, size_t T,
                     OutputMode mode, std::vector<std::vector<double>>& hs,
                     std::vector<double>& outputs) {
  const Kernels& k = kernels();
  hs.assign(T, std::vector<double>(p.n_h));
  outputs.assign(mode == OutputMode::kPerStep ? T * p.n_o : p.n_o, 0.0);
  const double* h_prev = p.h0.data();
  for (size_t t = 0; t < T; ++t) {
    std::vector<double>& h = hs[t];
    h = p.b_h;
    k.gemv(p.w_hh.v.data(), p.n_h, p.n_h, h_prev, h.data(), 1.0);
    k.gemv(p.w_xh.v.data(), p.n_h, p.n_in, x + t * p.n_in, h.data(), 1.0);
    if (p.activation == RnnActivation::kTanh) {
      for (double& v : h) v = std::tanh(v);
    } else {
      for (double& v : h) v = v > 0.0 ? v : 0.0;
    }
    if (mode == OutputMode::kPerStep) {
      double* o = outputs.data() + t * p.n_o;
      for (size_t i = 0; i < p.n_o; ++i) {
        o[i] = p.b_o[i] + k.dot(p.u_out.row(i), h.data(), p.n_h);
      }
    }
    h_prev = h.data();
  }
  if (mode == OutputMode::kFinalStep) {
    const double* h = T > 0 ? hs[T - 1].data() : p.h0.data();
    for (size_t i = 0; i < p.n_o; ++i) {
      outputs[i] = p.b_o[i] + k.dot(p.u_out.row(i), h, p.n_h);
    }
  }
}

void rnn_bptt_seq(const RNNParams& p, const double* x, size_t T,
                  OutputMode mode, const std::vector<std::vector<double>>& hs,
                  const std::vector<double>& dout, RnnGrads& g,
                  std::vector<double>* probe, double probe_scale) {
  const Kernels& k = kernels();
  std::vector<double> gh(p.n_h, 0.0), gz(p.n_h), gh_next(p.n_h);
  auto add_output = [&](const double* h, const double* go) {
    for (size_t i = 0; i < p.n_o; ++i) {
      if (go[i] == 0.0) continue;
      k.axpy(go[i], h, g.u_out.row(i), p.n_h);
      k.axpy(go[i], p.u_out.row(i), gh.data(), p.n_h);
      g.b_o[i] += go[i];
    }
  };
  for (size_t t = T; t-- > 0;) {
    const std::vector<double>& h = hs[t];
    if (mode == OutputMode::kPerStep) {
      add_output(h.data(), dout.data() + t * p.n_o);
    } else if (t == T - 1) {
      add_output(h.data(), dout.data());
    }
    if (probe) {
      (*probe)[t] +=
          std::sqrt(k.dot(gh.data(), gh.data(), p.n_h)) * probe_scale;
    }
    if (p.activation == RnnActivation::kTanh) {
      for (size_t j = 0; j < p.n_h; ++j) gz[j] = gh[j] * (1.0 - h[j] * h[j]);
    } else {
      for (size_t j = 0; j < p.n_h; ++j) gz[j] = h[j] > 0.0 ? gh[j] : 0.0;
    }
    k.axpy(1.0, gz.data(), g.b_h.data(), p.n_h);
    k.ger(g.w_xh.v.data(), p.n_h, p.n_in, gz.data(), x + t * p.n_in, 1.0);
    const double* h_prev = t > 0 ? hs[t - 1].data() : p.h0.data();
    k.ger(g.w_hh.v.data(), p.n_h, p.n_h, gz.data(), h_prev, 1.0);
    std::fill(gh_next.begin(), gh_next.end(), 0.0);
    k.gemv_t(p.w_hh.v.data(), p.n_h, p.n_h, gz.data(), gh_next.data(), 1.0);
    std::swap(gh, gh_next);
  }
  if (T == 0 && mode == OutputMode::kFinalStep) {
    add_output(p.h0.data(), dout.data());
  }
  k.axpy(1.0, gh.data(), g.h0.data(), p.n_h);
}

}  // namespace

size_t RnnModel::flat_size() const {
  return spans_size(rnn_spans(const_cast<RnnModel*>(this)->p_));
}

std::vector<TensorSpec> RnnModel::groups() const {
  const uint64_t nh = p_.n_h, ni = p_.n_in, no = p_.n_o;
  return {
      {"w_hh", {nh, nh}, nh * nh},
      {"w_xh", {nh, ni}, nh * ni},
      {"b_h", {nh}, nh},
      {"h0", {nh}, nh},
      {"u_out", {no, nh}, no * nh},
      {"b_o", {no}, no},
  };
}

void RnnModel::to_flat(double* out) const {
  flat_copy_out(rnn_spans(const_cast<RnnModel*>(this)->p_), out);
}

void RnnModel::from_flat(const double* in) { flat_copy_in(rnn_spans(p_), in); }

double RnnModel::batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                            std::vector<double>* probe) {
  check_batch(tb, p_.n_in, p_.n_o, "RnnModel::batch_grad");
  const OutputMode mode = task_output_mode(tb.kind);
  RnnGrads g(p_);
  if (probe) probe->assign(tb.T, 0.0);
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  std::vector<std::vector<double>> hs;
  std::vector<double> outputs;
  for (size_t e = 0; e < tb.batch; ++e) {
    rnn_forward_seq(p_, tb.seq(e), tb.T, mode, hs, outputs);
    LossGrad lg = sequence_loss(tb, e, outputs);
    loss += lg.loss * inv_b;
    for (double& d : lg.dout) d *= inv_b;
    rnn_bptt_seq(p_, tb.seq(e), tb.T, mode, hs, lg.dout, g, probe, inv_b);
  }
  grad.resize(flat_size());
  flat_copy_out(rnn_grad_spans(g), grad.data());
  return loss;
}

double RnnModel::evaluate(const TaskBatch& tb, double* metric) const {
  check_batch(tb, p_.n_in, p_.n_o, "RnnModel::evaluate");
  const OutputMode mode = task_output_mode(tb.kind);
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  MetricAccum acc;
  std::vector<std::vector<double>> hs;
  std::vector<double> outputs;
  for (size_t e = 0; e < tb.batch; ++e) {
    rnn_forward_seq(p_, tb.seq(e), tb.T, mode, hs, outputs);
    loss += sequence_loss(tb, e, outputs).loss * inv_b;
    acc.add(tb, e, outputs);
  }
  if (metric) *metric = acc.value();
  return loss;
}

void RnnModel::hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                            std::vector<double>& dist_to_final) const {
  check_batch(tb, p_.n_in, p_.n_o, "RnnModel::hidden_norms");
  norms.assign(tb.T, 0.0);
  dist_to_final.assign(tb.T, 0.0);
  if (tb.T == 0) return;
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  const Kernels& k = kernels();
  std::vector<std::vector<double>> hs;
  std::vector<double> outputs, diff(p_.n_h);
  for (size_t e = 0; e < tb.batch; ++e) {
    rnn_forward_seq(p_, tb.seq(e), tb.T, task_output_mode(tb.kind), hs,
                    outputs);
    const std::vector<double>& last = hs[tb.T - 1];
    for (size_t t = 0; t < tb.T; ++t) {
      norms[t] += std::sqrt(k.dot(hs[t].data(), hs[t].data(), p_.n_h)) * inv_b;
      for (size_t j = 0; j < p_.n_h; ++j) diff[j] = hs[t][j] - last[j];
      dist_to_final[t] +=
          std::sqrt(k.dot(diff.data(), diff.data(), p_.n_h)) * inv_b;
    }
  }
}

// --- LstmModel --------------------------------------------------------------

LstmModel::LstmModel(size_t n_in, size_t n_h, size_t n_o)
    : p_(n_in, n_h, n_o) {}

namespace {

std::vector<Span> lstm_spans(LSTMParams& p) {
  return {
      {p.w_i.v.data(), p.w_i.v.size()},
      {p.w_f.v.data(), p.w_f.v.size()},
      {p.w_o.v.data(), p.w_o.v.size()},
      {p.w_c.v.data(), p.w_c.v.size()},
      {p.b_i.data(), p.b_i.size()},
      {p.b_f.data(), p.b_f.size()},
      {p.b_o.data(), p.b_o.size()},
      {p.b_c.data(), p.b_c.size()},
      {p.h0.data(), p.h0.size()},
      {p.c0.data(), p.c0.size()},
      {p.u_out.v.data(), p.u_out.v.size()},
      {p.b_out.data(), p.b_out.size()},
  };
}

struct LstmGrads {
  RealMat w_i, w_f, w_o, w_c;
  std::vector<double> b_i, b_f, b_o, b_c, h0, c0;
  RealMat u_out;
  std::vector<double> b_out;

  explicit LstmGrads(const LSTMParams& p)
      : w_i(p.n_h, p.n_h + p.n_in),
        w_f(p.n_h, p.n_h + p.n_in),
        w_o(p.n_h, p.n_h + p.n_in),
        w_c(p.n_h, p.n_h + p.n_in),
        b_i(p.n_h, 0.0),
        b_f(p.n_h, 0.0),
        b_o(p.n_h, 0.0),
        b_c(p.n_h, 0.0),
        h0(p.n_h, 0.0),
        c0(p.n_h, 0.0),
        u_out(p.n_o, p.n_h),
        b_out(p.n_o, 0.0) {}
};

std::vector<Span> lstm_grad_spans(LstmGrads& g) {
  return {
      {g.w_i.v.data(), g.w_i.v.size()},
      {g.w_f.v.data(), g.w_f.v.size()},
      {g.w_o.v.data(), g.w_o.v.size()},
      {g.w_c.v.data(), g.w_c.v.size()},
      {g.b_i.data(), g.b_i.size()},
      {g.b_f.data(), g.b_f.size()},
      {g.b_o.data(), g.b_o.size()},
      {g.b_c.data(), g.b_c.size()},
      {g.h0.data(), g.h0.size()},
      {g.c0.data(), g.c0.size()},
      {g.u_out.v.data(), g.u_out.v.size()},
      {g.b_out.data(), g.b_out.size()},
  };
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LstmTape {
  std::vector<std::vector<double>> i, f, o, g, c, tanhc, h;
  void resize(size_t T, size_t n_h) {
    for (auto* v : {&i, &f, &o, &g, &c, &tanhc, &h}) {
      v->assign(T, std::vector<double>(n_h));
    }
  }
};

void lstm_forward_seq(const LSTMParams& p, const double* x, size_t T,
                      OutputMode mode, LstmTape& tape,
                      std::vector<double>& outputs) {
  const Kernels& k = kernels();
  const size_t nc = p.n_h + p.n_in;
  tape.resize(T, p.n_h);
  outputs.assign(mode == OutputMode::kPerStep ? T * p.n_o : p.n_o, 0.0);
  std::vector<double> concat(nc);
  const double* h_prev = p.h0.data();
  const double* c_prev = p.c0.data();
  for (size_t t = 0; t < T; ++t) {
    std::memcpy(concat.data(), h_prev, p.n_h * sizeof(double));
    std::memcpy(concat.data() + p.n_h, x + t * p.n_in,
                p.n_in * sizeof(double));
    auto& it = tape.i[t];
    auto& ft = tape.f[t];
    auto& ot = tape.o[t];
    auto& gt = tape.g[t];
    it = p.b_i;
    ft = p.b_f;
    ot = p.b_o;
    gt = p.b_c;
    k.gemv(p.w_i.v.data(), p.n_h, nc, concat.data(), it.data(), 1.0);
    k.gemv(p.w_f.v.data(), p.n_h, nc, concat.data(), ft.data(), 1.0);
    k.gemv(p.w_o.v.data(), p.n_h, nc, concat.data(), ot.data(), 1.0);
    k.gemv(p.w_c.v.data(), p.n_h, nc, concat.data(), gt.data(), 1.0);
    auto& ct = tape.c[t];
    auto& tc = tape.tanhc[t];
    auto& ht = tape.h[t];
    for (size_t j = 0; j < p.n_h; ++j) {
      it[j] = sigmoid(it[j]);
      ft[j] = sigmoid(ft[j]);
      ot[j] = sigmoid(ot[j]);
      gt[j] = std::tanh(gt[j]);
      ct[j] = ft[j] * c_prev[j] + it[j] * gt[j];
      tc[j] = std::tanh(ct[j]);
      ht[j] = ot[j] * tc[j];
    }
    if (mode == OutputMode::kPerStep) {
      double* out = outputs.data() + t * p.n_o;
      for (size_t i2 = 0; i2 < p.n_o; ++i2) {
        out[i2] = p.b_out[i2] + k.dot(p.u_out.row(i2), ht.data(), p.n_h);
      }
    }
    h_prev = ht.data();
    c_prev = ct.data();
  }
  if (mode == OutputMode::kFinalStep) {
    const double* h = T > 0 ? tape.h[T - 1].data() : p.h0.data();
    for (size_t i2 = 0; i2 < p.n_o; ++i2) {
      outputs[i2] = p.b_out[i2] + k.dot(p.u_out.row(i2), h, p.n_h);
    }
  }
}

void lstm_bptt_seq(const LSTMParams& p, const double* x, size_t T,
                   OutputMode mode, const LstmTape& tape,
                   const std::vector<double>& dout, LstmGrads& g,
                   std::vector<double>* probe, double probe_scale) {
  const Kernels& k = kernels();
  const size_t nc = p.n_h + p.n_in;
  std::vector<double> gh(p.n_h, 0.0), gc(p.n_h, 0.0);
  std::vector<double> di(p.n_h), df(p.n_h), do_(p.n_h), dg(p.n_h);
  std::vector<double> concat(nc), gconcat(nc);
  auto add_output = [&](const double* h, const double* go) {
    for (size_t i = 0; i < p.n_o; ++i) {
      if (go[i] == 0.0) continue;
      k.axpy(go[i], h, g.u_out.row(i), p.n_h);
      k.axpy(go[i], p.u_out.row(i), gh.data(), p.n_h);
      g.b_out[i] += go[i];
    }
  };
  for (size_t t = T; t-- > 0;) {
    const auto& it = tape.i[t];
    const auto& ft = tape.f[t];
    const auto& ot = tape.o[t];
    const auto& gt = tape.g[t];
    const auto& tc = tape.tanhc[t];
    const double* c_prev = t > 0 ? tape.c[t - 1].data() : p.c0.data();
    const double* h_prev = t > 0 ? tape.h[t - 1].data() : p.h0.data();

    if (mode == OutputMode::kPerStep) {
      add_output(tape.h[t].data(), dout.data() + t * p.n_o);
    } else if (t == T - 1) {
      add_output(tape.h[t].data(), dout.data());
    }
    if (probe) {
      (*probe)[t] +=
          std::sqrt(k.dot(gh.data(), gh.data(), p.n_h)) * probe_scale;
    }
    for (size_t j = 0; j < p.n_h; ++j) {
      const double go_gate = gh[j] * tc[j];
      gc[j] += gh[j] * ot[j] * (1.0 - tc[j] * tc[j]);
      const double gi = gc[j] * gt[j];
      const double gf = gc[j] * c_prev[j];
      const double gg = gc[j] * it[j];
      di[j] = gi * it[j] * (1.0 - it[j]);
      df[j] = gf * ft[j] * (1.0 - ft[j]);
      do_[j] = go_gate * ot[j] * (1.0 - ot[j]);
      dg[j] = gg * (1.0 - gt[j] * gt[j]);
      gc[j] *= ft[j];  // flows to c_{t-1}
      g.b_i[j] += di[j];
      g.b_f[j] += df[j];
      g.b_o[j] += do_[j];
      g.b_c[j] += dg[j];
    }
    std::memcpy(concat.data(), h_prev, p.n_h * sizeof(double));
    std::memcpy(concat.data() + p.n_h, x + t * p.n_in,
                p.n_in * sizeof(double));
    k.ger(g.w_i.v.data(), p.n_h, nc, di.data(), concat.data(), 1.0);
    k.ger(g.w_f.v.data(), p.n_h, nc, df.data(), concat.data(), 1.0);
    k.ger(g.w_o.v.data(), p.n_h, nc, do_.data(), concat.data(), 1.0);
    k.ger(g.w_c.v.data(), p.n_h, nc, dg.data(), concat.data(), 1.0);
    std::fill(gconcat.begin(), gconcat.end(), 0.0);
    k.gemv_t(p.w_i.v.data(), p.n_h, nc, di.data(), gconcat.data(), 1.0);
    k.gemv_t(p.w_f.v.data(), p.n_h, nc, df.data(), gconcat.data(), 1.0);
    k.gemv_t(p.w_o.v.data(), p.n_h, nc, do_.data(), gconcat.data(), 1.0);
    k.gemv_t(p.w_c.v.data(), p.n_h, nc, dg.data(), gconcat.data(), 1.0);
    std::memcpy(gh.data(), gconcat.data(), p.n_h * sizeof(double));
  }
  if (T == 0 && mode == OutputMode::kFinalStep) {
    add_output(p.h0.data(), dout.data());
  }
  k.axpy(1.0, gh.data(), g.h0.data(), p.n_h);
  k.axpy(1.0, gc.data(), g.c0.data(), p.n_h);
}

}  // namespace

size_t LstmModel::flat_size() const {
  return spans_size(lstm_spans(const_cast<LstmModel*>(this)->p_));
}

std::vector<TensorSpec> LstmModel::groups() const {
  const uint64_t nh = p_.n_h, nc = p_.n_h + p_.n_in, no = p_.n_o;
  return {
      {"w_i", {nh, nc}, nh * nc},   {"w_f", {nh, nc}, nh * nc},
      {"w_o", {nh, nc}, nh * nc},   {"w_c", {nh, nc}, nh * nc},
      {"b_i", {nh}, nh},            {"b_f", {nh}, nh},
      {"b_o", {nh}, nh},            {"b_c", {nh}, nh},
      {"h0", {nh}, nh},             {"c0", {nh}, nh},
      {"u_out", {no, nh}, no * nh}, {"b_out", {no}, no},
  };
}

void LstmModel::to_flat(double* out) const {
  flat_copy_out(lstm_spans(const_cast<LstmModel*>(this)->p_), out);
}

void LstmModel::from_flat(const double* in) {
  flat_copy_in(lstm_spans(p_), in);
}

double LstmModel::batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                             std::vector<double>* probe) {
  check_batch(tb, p_.n_in, p_.n_o, "LstmModel::batch_grad");
  const OutputMode mode = task_output_mode(tb.kind);
  LstmGrads g(p_);
  if (probe) probe->assign(tb.T, 0.0);
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  LstmTape tape;
  std::vector<double> outputs;
  for (size_t e = 0; e < tb.batch; ++e) {
    lstm_forward_seq(p_, tb.seq(e), tb.T, mode, tape, outputs);
    LossGrad lg = sequence_loss(tb, e, outputs);
    loss += lg.loss * inv_b;
    for (double& d : lg.dout) d *= inv_b;
    lstm_bptt_seq(p_, tb.seq(e), tb.T, mode, tape, lg.dout, g, probe, inv_b);
  }
  grad.resize(flat_size());
  flat_copy_out(lstm_grad_spans(g), grad.data());
  return loss;
}

double LstmModel::evaluate(const TaskBatch& tb, double* metric) const {
  check_batch(tb, p_.n_in, p_.n_o, "LstmModel::evaluate");
  const OutputMode mode = task_output_mode(tb.kind);
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  double loss = 0.0;
  MetricAccum acc;
  LstmTape tape;
  std::vector<double> outputs;
  for (size_t e = 0; e < tb.batch; ++e) {
    lstm_forward_seq(p_, tb.seq(e), tb.T, mode, tape, outputs);
    loss += sequence_loss(tb, e, outputs).loss * inv_b;
    acc.add(tb, e, outputs);
  }
  if (metric) *metric = acc.value();
  return loss;
}

void LstmModel::hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                             std::vector<double>& dist_to_final) const {
  check_batch(tb, p_.n_in, p_.n_o, "LstmModel::hidden_norms");
  norms.assign(tb.T, 0.0);
  dist_to_final.assign(tb.T, 0.0);
  if (tb.T == 0) return;
  const double inv_b = 1.0 / static_cast<double>(tb.batch);
  const Kernels& k = kernels();
  LstmTape tape;
  std::vector<double> outputs, diff(p_.n_h);
  for (size_t e = 0; e < tb.batch; ++e) {
    lstm_forward_seq(p_, tb.seq(e), tb.T, task_output_mode(tb.kind), tape,
                     outputs);
    const std::vector<double>& last = tape.h[tb.T - 1];
    for (size_t t = 0; t < tb.T; ++t) {
      norms[t] +=
          std::sqrt(k.dot(tape.h[t].data(), tape.h[t].data(), p_.n_h)) * inv_b;
      for (size_t j = 0; j < p_.n_h; ++j) diff[j] = tape.h[t][j] - last[j];
      dist_to_final[t] +=
          std::sqrt(k.dot(diff.data(), diff.data(), p_.n_h)) * inv_b;
    }
  }
}

}  // namespace urnn
