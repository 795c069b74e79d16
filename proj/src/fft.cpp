#include "urnn/fft.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "urnn/kernels.hpp"

namespace urnn {

bool is_power_of_two(size_t n) { return n > 0 && (n & (n - 1)) == 0; }

Fft::Fft(size_t n) : n_(n) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument("Fft: size must be a power of two");
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(n));

  bitrev_.resize(n);
  size_t log2n = 0;
  while ((size_t{1} << log2n) < n) ++log2n;
  for (size_t i = 0; i < n; ++i) {
    size_t r = 0;
    for (size_t bit = 0; bit < log2n; ++bit) {
      r |= ((i >> bit) & 1u) << (log2n - 1 - bit);
    }
    bitrev_[i] = static_cast<uint32_t>(r);
  }

  stage_off_.resize(log2n + 1);
  size_t total = 0;
  for (size_t s = 0; s < log2n; ++s) {
    stage_off_[s] = total;
    total += size_t{1} << s;  // half = 2^s twiddles per stage
  }
  stage_off_[log2n] = total;
  twr_.resize(total);
  twi_fwd_.resize(total);
  twi_inv_.resize(total);
  for (size_t s = 0; s < log2n; ++s) {
    const size_t half = size_t{1} << s;
    const size_t len = half * 2;
    for (size_t j = 0; j < half; ++j) {
      const double ang =
          -2.0 * std::numbers::pi * static_cast<double>(j) /
          static_cast<double>(len);
      twr_[stage_off_[s] + j] = std::cos(ang);
      twi_fwd_[stage_off_[s] + j] = std::sin(ang);
      twi_inv_[stage_off_[s] + j] = -std::sin(ang);
    }
  }
}

void Fft::run(double* re, double* im, const double* twi) const {
  for (size_t i = 0; i < n_; ++i) {
    const size_t r = bitrev_[i];
    if (r > i) {
      std::swap(re[i], re[r]);
      std::swap(im[i], im[r]);
    }
  }
  const Kernels& k = kernels();
  size_t stage = 0;
  for (size_t half = 1; half < n_; half *= 2, ++stage) {
    const size_t off = stage_off_[stage];
    k.fft_stage(re, im, twr_.data() + off, twi + off, n_, half);
  }
  for (size_t i = 0; i < n_; ++i) {
    re[i] *= scale_;
    im[i] *= scale_;
  }
}

void Fft::forward(double* re, double* im) const {
  run(re, im, twi_fwd_.data());
}

void Fft::inverse(double* re, double* im) const {
  run(re, im, twi_inv_.data());
}

namespace {

const Fft& cached_plan(size_t n) {
  static std::mutex mu;
  static std::map<size_t, std::unique_ptr<Fft>> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it == plans.end()) {
    it = plans.emplace(n, std::make_unique<Fft>(n)).first;
  }
  return *it->second;
}

}  // namespace

CVec fft_unitary(const CVec& x) {
  CVec y = x;
  cached_plan(x.size()).forward(y.re.data(), y.im.data());
  return y;
}

CVec ifft_unitary(const CVec& x) {
  CVec y = x;
  cached_plan(x.size()).inverse(y.re.data(), y.im.data());
  return y;
}

CVec dft_reference(const CVec& x) {
  const size_t n = x.size();
  if (n == 0) throw std::invalid_argument("dft_reference: empty input");
  CVec y(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (size_t k = 0; k < n; ++k) {
    double sre = 0.0, sim = 0.0;
    for (size_t j = 0; j < n; ++j) {
      // Reduce j*k mod n before the trig call to keep the angle small.
      const size_t jk = (j * k) % n;
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(jk) /
                         static_cast<double>(n);
      const double c = std::cos(ang), s = std::sin(ang);
      sre += c * x.re[j] - s * x.im[j];
      sim += c * x.im[j] + s * x.re[j];
    }
    y.re[k] = scale * sre;
    y.im[k] = scale * sim;
  }
  return y;
}

}  // namespace urnn
