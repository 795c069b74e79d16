#pragma once

#include <cstdint>
#include <vector>

namespace urnn {

// Deterministic 64-bit generator (splitmix64). Self-contained so that
// identical seeds give identical streams on every platform and stdlib.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_index(uint64_t n) {
    return static_cast<uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  uint64_t state_;
};

// Stream derivation rule: independent substreams are obtained by hashing
// (seed, tag, index) into a fresh seed. Used for batch generation, held-out
// evaluation data and parameter initialization so runs are reproducible.
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t index = 0) {
  Rng r(seed ^ (tag * 0x9e3779b97f4a7c15ull) ^ (index * 0xd1b54a32d192ed03ull));
  uint64_t s = r.next_u64();
  return s ^ r.next_u64();
}

// Fisher-Yates permutation of 0..n-1.
std::vector<uint32_t> random_permutation(size_t n, uint64_t seed);

}  // namespace urnn
