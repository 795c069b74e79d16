#include "urnn/baselines.hpp"

#include <cmath>

#include "urnn/kernels.hpp"

namespace urnn {

RNNParams::RNNParams(size_t n_in, size_t n_h, size_t n_o, RnnActivation act)
    : n_in(n_in),
      n_h(n_h),
      n_o(n_o),
      activation(act),
      w_hh(n_h, n_h),
      w_xh(n_h, n_in),
      b_h(n_h, 0.0),
      h0(n_h, 0.0),
      u_out(n_o, n_h),
      b_o(n_o, 0.0) {}

LSTMParams::LSTMParams(size_t n_in, size_t n_h, size_t n_o)
    : n_in(n_in),
      n_h(n_h),
      n_o(n_o),
      w_i(n_h, n_h + n_in),
      w_f(n_h, n_h + n_in),
      w_o(n_h, n_h + n_in),
      w_c(n_h, n_h + n_in),
      b_i(n_h, 0.0),
      b_f(n_h, 0.0),
      b_o(n_h, 0.0),
      b_c(n_h, 0.0),
      h0(n_h, 0.0),
      c0(n_h, 0.0),
      u_out(n_o, n_h),
      b_out(n_o, 0.0) {}

void clip_gradients(std::vector<double>& grads, double threshold) {
  const double n2 = kernels().dot(grads.data(), grads.data(), grads.size());
  const double norm = std::sqrt(n2);
  if (norm > threshold) {
    const double s = threshold / norm;
    for (double& g : grads) g *= s;
  }
}

}  // namespace urnn
