#pragma once

#include <cstdint>
#include <vector>

#include "urnn/complex_vec.hpp"
#include "urnn/tasks.hpp"

namespace urnn {

enum class RnnActivation { kTanh, kRelu };

// Plain real-valued RNN, h_{t+1} = act(W_hh h_t + W_xh x_{t+1} + b_h).
// With kRelu and an identity-initialized W_hh this is the IRNN.
struct RNNParams {
  size_t n_in = 0, n_h = 0, n_o = 0;
  RnnActivation activation = RnnActivation::kTanh;
  RealMat w_hh, w_xh;
  std::vector<double> b_h;
  std::vector<double> h0;
  RealMat u_out;  // n_o x n_h
  std::vector<double> b_o;

  RNNParams() = default;
  RNNParams(size_t n_in, size_t n_h, size_t n_o, RnnActivation act);
};

// Standard LSTM, no peepholes; gates in order input, forget, output,
// candidate, each acting on [h, x].
struct LSTMParams {
  size_t n_in = 0, n_h = 0, n_o = 0;
  RealMat w_i, w_f, w_o, w_c;  // n_h x (n_h + n_in)
  std::vector<double> b_i, b_f, b_o, b_c;
  std::vector<double> h0, c0;
  RealMat u_out;  // n_o x n_h
  std::vector<double> b_out;

  LSTMParams() = default;
  LSTMParams(size_t n_in, size_t n_h, size_t n_o);
};

// If the global L2 norm of the concatenated gradient exceeds threshold,
// rescale by threshold/norm; direction is preserved exactly.
void clip_gradients(std::vector<double>& grads, double threshold);

}  // namespace urnn
