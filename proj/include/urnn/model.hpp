#pragma once

#include <memory>
#include <string>
#include <vector>

#include "urnn/cell.hpp"
#include "urnn/tasks.hpp"

namespace urnn {

struct TensorSpec {
  std::string name;
  std::vector<uint64_t> dims;
  size_t size = 0;
};

// Common surface over the uRNN and the comparison cells: a flat parameter
// vector (fixed group order), batched loss/gradient, evaluation and the
// per-time-step diagnostic probes.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  virtual std::string kind() const = 0;
  virtual size_t flat_size() const = 0;
  virtual std::vector<TensorSpec> groups() const = 0;
  virtual void to_flat(double* out) const = 0;
  virtual void from_flat(const double* in) = 0;

  // Mean loss over the batch; writes d(loss)/d(param) into grad (resized
  // and zeroed). probe, when given, receives batch-mean ||dC/dh_t||.
  virtual double batch_grad(const TaskBatch& tb, std::vector<double>& grad,
                            std::vector<double>* probe = nullptr) = 0;

  // Mean loss without gradients; metric is recall accuracy (copy), MSE
  // (adding) or classification accuracy.
  virtual double evaluate(const TaskBatch& tb, double* metric) const = 0;

  // Batch-mean per-step hidden-state norms and distances to the final
  // state.
  virtual void hidden_norms(const TaskBatch& tb, std::vector<double>& norms,
                            std::vector<double>& dist_to_final) const = 0;
};

OutputMode task_output_mode(TaskKind kind);

// Loss and output-cotangents for one sequence; shared by all models.
LossGrad sequence_loss(const TaskBatch& tb, size_t e,
                       const std::vector<double>& outputs);

// Task metric accumulated over a batch from per-sequence outputs.
struct MetricAccum {
  double correct = 0.0;
  double total = 0.0;
  void add(const TaskBatch& tb, size_t e, const std::vector<double>& outputs);
  double value() const { return total > 0.0 ? correct / total : 0.0; }
};

}  // namespace urnn
