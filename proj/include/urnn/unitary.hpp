#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "urnn/complex_vec.hpp"
#include "urnn/fft.hpp"

namespace urnn {

// Diagonal unitary, entries e^{i w_j}. cos/sin caches must be refreshed
// after every change to w (refresh() is cheap and called by the owners).
struct DiagonalPhase {
  std::vector<double> w;
  std::vector<double> cosw, sinw;

  DiagonalPhase() = default;
  explicit DiagonalPhase(size_t n) : w(n, 0.0) { refresh(); }

  size_t size() const { return w.size(); }
  void refresh();
};

// Householder-style reflection I - 2 v v* / ||v||^2 in a complex vector v.
// Invariant to real rescaling of v; v = 0 is rejected at application time.
struct Reflection {
  CVec v;

  Reflection() = default;
  explicit Reflection(size_t n) : v(n) {}

  size_t size() const { return v.size(); }
};

// Fixed random index permutation, (P x)_j = x_{indices[j]}. Sampled once
// from the seed by Fisher-Yates and never trained.
struct FixedPermutation {
  std::vector<uint32_t> indices;
  std::vector<uint32_t> inverse;
  uint64_t seed = 0;

  static FixedPermutation sample(size_t n, uint64_t seed);
  static FixedPermutation identity(size_t n);

  size_t size() const { return indices.size(); }
};

CVec apply_diag(const DiagonalPhase& d, const CVec& x);
CVec apply_reflection(const Reflection& r, const CVec& x);
CVec apply_permutation(const FixedPermutation& p, const CVec& x);
CVec apply_permutation_inverse(const FixedPermutation& p, const CVec& x);

// The composed hidden-to-hidden operator, applied as
//   D1, F, R1, Pi, D2, F^-1, R2, D3   (rightmost factor first).
struct UnitaryComposition {
  size_t n = 0;
  DiagonalPhase d1, d2, d3;
  Reflection r1, r2;
  FixedPermutation perm;
  Fft fft;

  explicit UnitaryComposition(size_t n, uint64_t perm_seed = 0);

  // Call after mutating any angle or reflection parameters.
  void refresh() {
    d1.refresh();
    d2.refresh();
    d3.refresh();
  }
};

// Inputs of the seven interior stages, recorded by the forward pass for
// the backward pass (the first stage input is the caller's x).
struct CompositionTape {
  std::array<CVec, 7> stage_in;
};

// Parameter cotangents of one composition application; accumulated across
// time steps.
struct CompositionGrads {
  std::vector<double> dw1, dw2, dw3;
  CVec dv1, dv2;

  CompositionGrads() = default;
  explicit CompositionGrads(size_t n)
      : dw1(n, 0.0), dw2(n, 0.0), dw3(n, 0.0), dv1(n), dv2(n) {}
  void set_zero();
};

CVec apply_composition(const UnitaryComposition& c, const CVec& x,
                       CompositionTape* tape = nullptr);

// Pulls the output cotangent g back through all eight stages: returns the
// input cotangent (the adjoint W* g, since every stage is complex-linear)
// and accumulates per-stage parameter cotangents into grads.
CVec composition_vjp(const UnitaryComposition& c, const CVec& x,
                     const CompositionTape& tape, const CVec& g,
                     CompositionGrads& grads);

// Dense matrix with columns W e_j; guarded to n <= 64 (test support).
CMat materialize(const UnitaryComposition& c);

}  // namespace urnn
