#pragma once

#include <cstdint>
#include <vector>

#include "urnn/complex_vec.hpp"

namespace urnn {

// Radix-2 iterative FFT with symmetric 1/sqrt(n) normalization, so forward
// and inverse are exactly adjoint unitary maps. Sizes must be powers of two.
class Fft {
 public:
  explicit Fft(size_t n);

  size_t size() const { return n_; }

  // In-place unitary DFT (negative-exponent convention).
  void forward(double* re, double* im) const;
  // In-place adjoint (= inverse) of forward.
  void inverse(double* re, double* im) const;

 private:
  void run(double* re, double* im, const double* twi) const;

  size_t n_ = 0;
  double scale_ = 1.0;
  std::vector<uint32_t> bitrev_;
  // Per-stage contiguous twiddles, stages concatenated: e^{-2*pi*i*j/len}.
  std::vector<double> twr_, twi_fwd_, twi_inv_;
  std::vector<size_t> stage_off_;
};

// One-shot unitary transforms (plans are cached per size).
CVec fft_unitary(const CVec& x);
CVec ifft_unitary(const CVec& x);

// O(n^2) direct evaluation of the unitary DFT; any n >= 1. Independent of
// the fast path, kept as a check for it.
CVec dft_reference(const CVec& x);

bool is_power_of_two(size_t n);

}  // namespace urnn
