#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace urnn {

enum class TaskKind { kCopy, kAdding, kClassify };

// One batch of sequences. Inputs are dense batch x T x n_in row-major.
// Targets are integer per step (copy), one real per sequence (adding), or
// one class label per sequence (classification).
struct TaskBatch {
  TaskKind kind = TaskKind::kCopy;
  size_t batch = 0, T = 0, n_in = 0, n_o = 0;
  std::vector<double> inputs;
  std::vector<int> int_targets;     // copy: batch x T; classify: batch
  std::vector<double> real_targets; // adding: batch

  const double* seq(size_t e) const { return inputs.data() + e * T * n_in; }
};

// Copy-memory task: 8 content categories, a blank (8) and a delimiter (9),
// one-hot encoded over 10 input symbols; targets over 9 classes where the
// delimiter never appears. Sequence length is T + 20.
TaskBatch gen_copy_batch(size_t T, size_t batch, uint64_t seed);

// Cross entropy in nats of the optimal memoryless strategy, 10 ln(8)/(T+20).
double copy_baseline_ce(size_t T);

// Adding problem: per step the input is (value, marker); exactly one marker
// in each half; the target is the sum of the two marked values.
TaskBatch gen_adding_batch(size_t T, size_t batch, uint64_t seed);

// Expected MSE of always predicting 1: Var(U[0,1] + U[0,1]) = 1/6.
double adding_baseline_mse();

// --- MNIST ------------------------------------------------------------------

struct MnistSet {
  size_t count = 0, rows = 0, cols = 0;
  std::vector<uint8_t> images;  // count x rows*cols
  std::vector<uint8_t> labels;  // count
  std::vector<uint32_t> permutation;  // empty = none
};

// IDX-format reader (big-endian headers; magic 0x803 images, 0x801 labels).
// Throws std::runtime_error naming the offending field on malformed input.
MnistSet load_mnist_idx(const std::string& images_path,
                        const std::string& labels_path);

// Reindexes every image by one permutation drawn from seed (bijective on
// pixel positions, fixed for the whole set).
MnistSet permute_pixels(const MnistSet& set, uint64_t seed);

// Pixel-per-step batch (T = rows*cols, n_in = 1, values scaled to [0,1])
// for the given example indices.
TaskBatch mnist_batch(const MnistSet& set, const std::vector<size_t>& idx);

}  // namespace urnn
