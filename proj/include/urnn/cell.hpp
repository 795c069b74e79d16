#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "urnn/complex_vec.hpp"
#include "urnn/unitary.hpp"

namespace urnn {

// Smoothing constant for z/|z| at the origin: the nonlinearity is
// implemented as z * relu(|z| + b) / (|z| + eps).
inline constexpr double kModReluEps = 1e-5;

enum class OutputMode { kPerStep, kFinalStep };
// kIdentity bypasses the nonlinearity; the recurrence is then purely
// unitary, which is the regime where gradient norms are preserved exactly.
enum class Nonlinearity { kModRelu, kIdentity };

CVec modrelu(const CVec& z, const std::vector<double>& b,
             double eps = kModReluEps);
// Gradients of a real loss through the stacked real coordinates; zero
// wherever |z| + b < 0.
std::pair<CVec, std::vector<double>> modrelu_vjp(const CVec& z,
                                                 const std::vector<double>& b,
                                                 const CVec& g,
                                                 double eps = kModReluEps);

// All learnable quantities of the uRNN.
struct URNNParams {
  size_t n_in = 0, n_h = 0, n_o = 0;
  CMat v_in;               // n_h x n_in complex input map
  UnitaryComposition w;    // hidden-to-hidden
  std::vector<double> b;   // modReLU biases
  RealMat u_out;           // n_o x 2 n_h real output map
  std::vector<double> b_o; // output bias
  CVec h0;                 // learned initial state

  URNNParams(size_t n_in, size_t n_h, size_t n_o, uint64_t perm_seed);

  size_t scalar_count() const;
  // Re-derive cached trig tables after parameter mutation.
  void refresh() { w.refresh(); }
};

// Per-step records needed by the backward pass.
struct UrnnTape {
  std::vector<CompositionTape> comp;
  std::vector<CVec> z;
  std::vector<CVec> h;

  void resize(size_t T) {
    comp.resize(T);
    z.resize(T);
    h.resize(T);
  }
};

struct UrnnGrads {
  CMat v_in;
  CompositionGrads w;
  std::vector<double> b;
  RealMat u_out;
  std::vector<double> b_o;
  CVec h0;

  explicit UrnnGrads(const URNNParams& p);
  void set_zero();
};

// Runs h_{t+1} = sigma(W h_t + V x_{t+1}) from h0 over a T x n_in input
// sequence; outputs are U [Re h; Im h] + b_o per step or at the final step
// only (T = 0 in final mode applies the output map to h0).
void urnn_forward(const URNNParams& p, const double* x, size_t T,
                  OutputMode mode, Nonlinearity nl, UrnnTape* tape,
                  std::vector<double>& outputs);

// Exact gradients of a real loss given per-step output cotangents
// (T x n_o in per-step mode, n_o in final mode). When probe_norms is given
// it receives ||dC/dh_t|| for t = 1..T.
void urnn_bptt(const URNNParams& p, const double* x, size_t T,
               OutputMode mode, Nonlinearity nl, const UrnnTape& tape,
               const std::vector<double>& dout, UrnnGrads& grads,
               std::vector<double>* probe_norms = nullptr);

// --- losses ---------------------------------------------------------------

struct LossGrad {
  double loss = 0.0;
  std::vector<double> dout;
};

// Softmax cross entropy in nats, averaged over the T steps of one
// sequence; dout = (softmax - onehot) / T.
LossGrad cross_entropy_per_step(const std::vector<double>& outputs,
                                const std::vector<int>& targets, size_t n_o);

// Cross entropy of a single output vector against one class label.
LossGrad cross_entropy_final(const std::vector<double>& output, int target);

// Squared error (o - t)^2 of a scalar output; dout = 2 (o - t).
LossGrad mse_final(double output, double target);

}  // namespace urnn
