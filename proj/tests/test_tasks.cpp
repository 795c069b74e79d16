#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "urnn/rng.hpp"
#include "urnn/tasks.hpp"

using namespace urnn;

namespace {

int onehot_symbol(const TaskBatch& tb, size_t e, size_t t) {
  const double* in = tb.seq(e) + t * tb.n_in;
  int sym = -1;
  for (size_t j = 0; j < tb.n_in; ++j) {
    if (in[j] == 1.0) {
      CHECK(sym == -1);  // exactly one hot entry
      sym = static_cast<int>(j);
    } else {
      CHECK(in[j] == 0.0);
    }
  }
  REQUIRE(sym >= 0);
  return sym;
}

// Minimal IDX writer used as the byte-level oracle for the loader.
void write_idx_images(const std::string& path, uint32_t count, uint32_t rows,
                      uint32_t cols, const std::vector<uint8_t>& pixels,
                      uint32_t magic = 0x00000803u, bool truncate = false) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  auto be32 = [&](uint32_t v) {
    const uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8),
                          uint8_t(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  be32(magic);
  be32(count);
  be32(rows);
  be32(cols);
  size_t n = pixels.size();
  if (truncate) n /= 2;
  f.write(reinterpret_cast<const char*>(pixels.data()),
          static_cast<std::streamsize>(n));
}

void write_idx_labels(const std::string& path, uint32_t count,
                      const std::vector<uint8_t>& labels,
                      uint32_t magic = 0x00000801u) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  auto be32 = [&](uint32_t v) {
    const uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8),
                          uint8_t(v)};
    f.write(reinterpret_cast<const char*>(b), 4);
  };
  be32(magic);
  be32(count);
  f.write(reinterpret_cast<const char*>(labels.data()),
          static_cast<std::streamsize>(labels.size()));
}

}  // namespace

TEST_CASE("gen_copy_batch: construction rules hold on every sample") {
  for (uint64_t seed : {1ull, 2ull, 77ull, 123456ull}) {
    const size_t T = 23;
    TaskBatch tb = gen_copy_batch(T, 8, seed);
    CHECK(tb.T == T + 20);
    CHECK(tb.n_in == 10);
    CHECK(tb.n_o == 9);
    for (size_t e = 0; e < tb.batch; ++e) {
      const int* tgt = tb.int_targets.data() + e * tb.T;
      for (size_t t = 0; t < tb.T; ++t) {
        const int sym = onehot_symbol(tb, e, t);
        if (t < 10) {
          CHECK(sym <= 7);
        } else if (t == T + 9) {
          CHECK(sym == 9);
        } else {
          CHECK(sym == 8);
        }
        if (t < T + 10) {
          CHECK(tgt[t] == 8);
        } else {
          CHECK(tgt[t] == onehot_symbol(tb, e, t - (T + 10)));
        }
        CHECK(tgt[t] >= 0);
        CHECK(tgt[t] <= 8);
      }
    }
  }
}

TEST_CASE("gen_copy_batch: head symbols are uniform over 0..7") {
  std::vector<size_t> counts(8, 0);
  size_t total = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    TaskBatch tb = gen_copy_batch(5, 100, 9000 + seed);
    for (size_t e = 0; e < tb.batch; ++e) {
      for (size_t t = 0; t < 10; ++t) {
        ++counts[onehot_symbol(tb, e, t)];
        ++total;
      }
    }
  }
  CHECK(total == 100000);
  for (size_t c : counts) {
    CHECK(static_cast<double>(c) / total == doctest::Approx(0.125).epsilon(0.08));
  }
}

TEST_CASE("gen_copy_batch is deterministic in the seed") {
  TaskBatch a = gen_copy_batch(11, 4, 42);
  TaskBatch b = gen_copy_batch(11, 4, 42);
  CHECK(a.inputs == b.inputs);
  CHECK(a.int_targets == b.int_targets);
  TaskBatch c = gen_copy_batch(11, 4, 43);
  CHECK(a.inputs != c.inputs);
}

TEST_CASE("copy_baseline_ce: paper values and monotone decay") {
  CHECK(copy_baseline_ce(100) == doctest::Approx(0.173287).epsilon(1e-5));
  CHECK(copy_baseline_ce(200) == doctest::Approx(0.094520).epsilon(1e-5));
  CHECK(copy_baseline_ce(500) == doctest::Approx(0.039990).epsilon(1e-5));
  double prev = copy_baseline_ce(1);
  for (size_t T = 2; T < 2000; T += 13) {
    const double cur = copy_baseline_ce(T);
    CHECK(cur < prev);
    prev = cur;
  }
  CHECK(copy_baseline_ce(4000000) < 1e-5);
}

TEST_CASE("gen_adding_batch: invariants on every sample") {
  CHECK_THROWS_AS(gen_adding_batch(1, 2, 0), std::invalid_argument);
  for (uint64_t seed : {3ull, 8ull, 500ull}) {
    const size_t T = 17;
    TaskBatch tb = gen_adding_batch(T, 16, seed);
    CHECK(tb.n_in == 2);
    for (size_t e = 0; e < tb.batch; ++e) {
      const double* in = tb.seq(e);
      size_t first_half = 0, second_half = 0;
      double marked_sum = 0.0;
      for (size_t t = 0; t < T; ++t) {
        const double v = in[t * 2];
        const double m = in[t * 2 + 1];
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
        CHECK((m == 0.0 || m == 1.0));
        if (m == 1.0) {
          marked_sum += v;
          if (t < T / 2) ++first_half;
          else ++second_half;
        }
      }
      CHECK(first_half == 1);
      CHECK(second_half == 1);
      CHECK(tb.real_targets[e] == doctest::Approx(marked_sum).epsilon(1e-15));
      CHECK(tb.real_targets[e] >= 0.0);
      CHECK(tb.real_targets[e] <= 2.0);
    }
  }
}

TEST_CASE("gen_adding_batch: hand-checked marked sum") {
  // values (0.2, 0.9, 0.4, 0.7) with markers on 0 and 3 target 0.9.
  TaskBatch tb = gen_adding_batch(4, 1, 1);
  double* in = tb.inputs.data();
  const double vals[4] = {0.2, 0.9, 0.4, 0.7};
  for (size_t t = 0; t < 4; ++t) {
    in[t * 2] = vals[t];
    in[t * 2 + 1] = (t == 0 || t == 3) ? 1.0 : 0.0;
  }
  tb.real_targets[0] = in[0] + in[6];
  CHECK(tb.real_targets[0] == doctest::Approx(0.9));
}

TEST_CASE("gen_adding_batch: Monte Carlo target mean is 1") {
  double sum = 0.0;
  size_t n = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    TaskBatch tb = gen_adding_batch(50, 1000, 31000 + seed);
    for (double t : tb.real_targets) {
      sum += t;
      ++n;
    }
  }
  CHECK(n == 100000);
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("adding_baseline_mse: exact value and simulated predict-1") {
  CHECK(adding_baseline_mse() == doctest::Approx(1.0 / 6.0));
  CHECK(adding_baseline_mse() == doctest::Approx(0.167).epsilon(2e-3));
  // Var(U+U) = 2/12.
  CHECK(2.0 * (1.0 / 12.0) == doctest::Approx(adding_baseline_mse()));

  double mse = 0.0;
  size_t n = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    TaskBatch tb = gen_adding_batch(10, 10000, 77000 + seed);
    for (double t : tb.real_targets) {
      mse += (1.0 - t) * (1.0 - t);
      ++n;
    }
  }
  CHECK(n == 1000000);
  CHECK(mse / n == doctest::Approx(1.0 / 6.0).epsilon(0.012));
}

TEST_CASE("load_mnist_idx: bit-exact parse of a synthesized file pair") {
  const std::string img = "/tmp/urnn_test_images.idx";
  const std::string lab = "/tmp/urnn_test_labels.idx";
  const uint32_t count = 7, rows = 4, cols = 5;
  std::vector<uint8_t> pixels(count * rows * cols);
  for (size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = static_cast<uint8_t>((i * 37 + 11) % 256);
  }
  std::vector<uint8_t> labels = {0, 9, 3, 1, 7, 2, 5};
  write_idx_images(img, count, rows, cols, pixels);
  write_idx_labels(lab, count, labels);

  MnistSet set = load_mnist_idx(img, lab);
  CHECK(set.count == count);
  CHECK(set.rows == rows);
  CHECK(set.cols == cols);
  CHECK(set.images == pixels);
  CHECK(set.labels == labels);
}

TEST_CASE("load_mnist_idx: malformed inputs are rejected with no partial set") {
  const std::string img = "/tmp/urnn_bad_images.idx";
  const std::string lab = "/tmp/urnn_bad_labels.idx";
  std::vector<uint8_t> pixels(3 * 2 * 2, 8);
  std::vector<uint8_t> labels = {1, 2, 3};

  write_idx_images(img, 3, 2, 2, pixels, 0x00000802u);
  write_idx_labels(lab, 3, labels);
  CHECK_THROWS_WITH_AS(load_mnist_idx(img, lab),
                       doctest::Contains("magic"), std::runtime_error);

  write_idx_images(img, 3, 2, 2, pixels);
  write_idx_labels(lab, 3, labels, 0x00000803u);
  CHECK_THROWS_WITH_AS(load_mnist_idx(img, lab),
                       doctest::Contains("magic"), std::runtime_error);

  // Count mismatch between the two files.
  write_idx_images(img, 3, 2, 2, pixels);
  write_idx_labels(lab, 4, labels);
  CHECK_THROWS_WITH_AS(load_mnist_idx(img, lab),
                       doctest::Contains("count"), std::runtime_error);

  // Truncated image payload.
  write_idx_images(img, 3, 2, 2, pixels, 0x00000803u, true);
  write_idx_labels(lab, 3, labels);
  CHECK_THROWS_WITH_AS(load_mnist_idx(img, lab),
                       doctest::Contains("truncated"), std::runtime_error);

  CHECK_THROWS_AS(load_mnist_idx("/tmp/does_not_exist.idx", lab),
                  std::runtime_error);
}

TEST_CASE("permute_pixels: bijection, determinism, multiset preservation") {
  const uint32_t count = 5, rows = 6, cols = 7;
  MnistSet set;
  set.count = count;
  set.rows = rows;
  set.cols = cols;
  set.images.resize(count * rows * cols);
  Rng rng(3);
  for (uint8_t& p : set.images) {
    p = static_cast<uint8_t>(rng.uniform_index(256));
  }
  set.labels = {0, 1, 2, 3, 4};

  MnistSet p1 = permute_pixels(set, 99);
  MnistSet p2 = permute_pixels(set, 99);
  CHECK(p1.images == p2.images);
  CHECK(p1.permutation == p2.permutation);

  // Bijection on 0..rows*cols-1.
  std::vector<bool> seen(rows * cols, false);
  for (uint32_t i : p1.permutation) {
    CHECK(!seen[i]);
    seen[i] = true;
  }

  // Applying the inverse permutation restores every image.
  const size_t px = rows * cols;
  for (size_t e = 0; e < count; ++e) {
    std::vector<uint8_t> restored(px);
    for (size_t j = 0; j < px; ++j) {
      restored[p1.permutation[j]] = p1.images[e * px + j];
    }
    for (size_t j = 0; j < px; ++j) {
      CHECK(restored[j] == set.images[e * px + j]);
    }
    // Pixel multiset is unchanged.
    std::vector<int> h1(256, 0), h2(256, 0);
    for (size_t j = 0; j < px; ++j) {
      ++h1[set.images[e * px + j]];
      ++h2[p1.images[e * px + j]];
    }
    CHECK(h1 == h2);
  }

  MnistSet p3 = permute_pixels(set, 100);
  CHECK(p1.images != p3.images);
}

TEST_CASE("mnist_batch: scaling, feed order and shapes") {
  MnistSet set;
  set.count = 2;
  set.rows = 2;
  set.cols = 3;
  set.images = {// image 0 rows: top (0,51,102), bottom (153,204,255)
                0, 51, 102, 153, 204, 255,
                // image 1
                255, 0, 0, 0, 0, 0};
  set.labels = {7, 1};
  TaskBatch tb = mnist_batch(set, {0, 1});
  CHECK(tb.T == 6);
  CHECK(tb.n_in == 1);
  CHECK(tb.n_o == 10);
  CHECK(tb.int_targets[0] == 7);
  // Bottom row is fed first, left to right.
  CHECK(tb.inputs[0] == doctest::Approx(153.0 / 255.0));
  CHECK(tb.inputs[1] == doctest::Approx(204.0 / 255.0));
  CHECK(tb.inputs[2] == doctest::Approx(1.0));
  CHECK(tb.inputs[3] == doctest::Approx(0.0));
  CHECK(tb.inputs[5] == doctest::Approx(102.0 / 255.0));
  // Image 1: top-left 255 appears at step 3 (bottom row first).
  CHECK(tb.inputs[6 + 3] == doctest::Approx(1.0));
  CHECK_THROWS_AS(mnist_batch(set, {5}), std::out_of_range);
}
