#include "urnn/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "urnn/rng.hpp"

namespace urnn {

TaskBatch gen_copy_batch(size_t T, size_t batch, uint64_t seed) {
  if (T < 1) throw std::invalid_argument("gen_copy_batch: T must be >= 1");
  const size_t len = T + 20;
  constexpr size_t kSymbols = 10;  // 8 content + blank(8) + delimiter(9)
  constexpr int kBlank = 8;
  constexpr int kDelim = 9;

  TaskBatch tb;
  tb.kind = TaskKind::kCopy;
  tb.batch = batch;
  tb.T = len;
  tb.n_in = kSymbols;
  tb.n_o = 9;
  tb.inputs.assign(batch * len * kSymbols, 0.0);
  tb.int_targets.assign(batch * len, kBlank);

  Rng rng(seed);
  for (size_t e = 0; e < batch; ++e) {
    int head[10];
    for (int& c : head) c = static_cast<int>(rng.uniform_index(8));
    double* in = tb.inputs.data() + e * len * kSymbols;
    int* tgt = tb.int_targets.data() + e * len;
    for (size_t t = 0; t < len; ++t) {
      int sym = kBlank;
      if (t < 10) {
        sym = head[t];
      } else if (t == T + 9) {
        sym = kDelim;
      }
      in[t * kSymbols + sym] = 1.0;
    }
    for (size_t j = 0; j < 10; ++j) tgt[T + 10 + j] = head[j];
  }
  return tb;
}

double copy_baseline_ce(size_t T) {
  return 10.0 * std::log(8.0) / static_cast<double>(T + 20);
}

TaskBatch gen_adding_batch(size_t T, size_t batch, uint64_t seed) {
  if (T < 2) throw std::invalid_argument("gen_adding_batch: T must be >= 2");
  TaskBatch tb;
  tb.kind = TaskKind::kAdding;
  tb.batch = batch;
  tb.T = T;
  tb.n_in = 2;
  tb.n_o = 1;
  tb.inputs.assign(batch * T * 2, 0.0);
  tb.real_targets.assign(batch, 0.0);

  Rng rng(seed);
  const size_t half = T / 2;
  for (size_t e = 0; e < batch; ++e) {
    double* in = tb.inputs.data() + e * T * 2;
    for (size_t t = 0; t < T; ++t) in[t * 2] = rng.uniform();
    const size_t m1 = rng.uniform_index(half);
    const size_t m2 = half + rng.uniform_index(T - half);
    in[m1 * 2 + 1] = 1.0;
    in[m2 * 2 + 1] = 1.0;
    tb.real_targets[e] = in[m1 * 2] + in[m2 * 2];
  }
  return tb;
}

double adding_baseline_mse() { return 1.0 / 6.0; }

namespace {

uint32_t read_u32_be(std::ifstream& f, const char* field) {
  uint8_t b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4)) {
    throw std::runtime_error(std::string("mnist: truncated ") + field);
  }
  return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) |
         (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

}  // namespace

MnistSet load_mnist_idx(const std::string& images_path,
                        const std::string& labels_path) {
  std::ifstream fi(images_path, std::ios::binary);
  if (!fi) throw std::runtime_error("mnist: cannot open " + images_path);
  std::ifstream fl(labels_path, std::ios::binary);
  if (!fl) throw std::runtime_error("mnist: cannot open " + labels_path);

  const uint32_t magic_i = read_u32_be(fi, "image magic");
  if (magic_i != 0x00000803u) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "mnist: bad image magic 0x%08x", magic_i);
    throw std::runtime_error(buf);
  }
  MnistSet set;
  set.count = read_u32_be(fi, "image count");
  set.rows = read_u32_be(fi, "image rows");
  set.cols = read_u32_be(fi, "image cols");

  const uint32_t magic_l = read_u32_be(fl, "label magic");
  if (magic_l != 0x00000801u) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "mnist: bad label magic 0x%08x", magic_l);
    throw std::runtime_error(buf);
  }
  const uint32_t label_count = read_u32_be(fl, "label count");
  if (label_count != set.count) {
    throw std::runtime_error("mnist: image/label count mismatch");
  }

  set.images.resize(set.count * set.rows * set.cols);
  if (!fi.read(reinterpret_cast<char*>(set.images.data()),
               static_cast<std::streamsize>(set.images.size()))) {
    throw std::runtime_error("mnist: truncated image data");
  }
  set.labels.resize(set.count);
  if (!fl.read(reinterpret_cast<char*>(set.labels.data()),
               static_cast<std::streamsize>(set.labels.size()))) {
    throw std::runtime_error("mnist: truncated label data");
  }
  for (uint8_t l : set.labels) {
    if (l > 9) throw std::runtime_error("mnist: label out of range");
  }
  return set;
}

MnistSet permute_pixels(const MnistSet& set, uint64_t seed) {
  const size_t px = set.rows * set.cols;
  MnistSet out = set;
  out.permutation = random_permutation(px, seed);
  for (size_t e = 0; e < set.count; ++e) {
    const uint8_t* src = set.images.data() + e * px;
    uint8_t* dst = out.images.data() + e * px;
    for (size_t j = 0; j < px; ++j) dst[j] = src[out.permutation[j]];
  }
  return out;
}

TaskBatch mnist_batch(const MnistSet& set, const std::vector<size_t>& idx) {
  const size_t px = set.rows * set.cols;
  TaskBatch tb;
  tb.kind = TaskKind::kClassify;
  tb.batch = idx.size();
  tb.T = px;
  tb.n_in = 1;
  tb.n_o = 10;
  tb.inputs.resize(tb.batch * px);
  tb.int_targets.resize(tb.batch);
  for (size_t e = 0; e < idx.size(); ++e) {
    if (idx[e] >= set.count) {
      throw std::out_of_range("mnist_batch: index out of range");
    }
    const uint8_t* src = set.images.data() + idx[e] * px;
    double* dst = tb.inputs.data() + e * px;
    // Pixels are fed left-to-right, bottom row first.
    for (size_t t = 0; t < px; ++t) {
      const size_t r = set.rows - 1 - t / set.cols;
      dst[t] = src[r * set.cols + t % set.cols] / 255.0;
    }
    tb.int_targets[e] = set.labels[idx[e]];
  }
  return tb;
}

}  // namespace urnn
