#pragma once

#include <cstdint>
#include <vector>

#include "urnn/baselines.hpp"
#include "urnn/cell.hpp"

namespace urnn {

// RMSProp with running mean of squared gradients:
//   acc <- decay*acc + (1-decay)*g^2;  p <- p - lr*g/(sqrt(acc)+eps).
struct RmsProp {
  double lr = 1e-3;
  double decay = 0.9;
  double eps = 1e-8;
  std::vector<double> accum;

  RmsProp() = default;
  RmsProp(double lr, double decay, size_t n)
      : lr(lr), decay(decay), accum(n, 0.0) {}

  // Throws on shape mismatch or non-finite gradients (message names the
  // first offending index).
  void step(std::vector<double>& params, const std::vector<double>& grads);
};

// Initialization for every uRNN parameter family: Glorot-uniform input and
// output maps, zero biases, U[-1,1] reflections, U[-pi,pi] phases, and h0
// scaled so E||h0||^2 = 1.
URNNParams init_urnn(size_t n_in, size_t n_h, size_t n_o, uint64_t seed);

// Glorot matrices throughout; the tanh recurrence is scaled below the
// edge-of-chaos gain and the IRNN recurrence starts at the identity.
RNNParams init_rnn(size_t n_in, size_t n_h, size_t n_o, RnnActivation act,
                   uint64_t seed);

// Glorot matrices, forget-gate bias 1.
LSTMParams init_lstm(size_t n_in, size_t n_h, size_t n_o, uint64_t seed);

}  // namespace urnn
