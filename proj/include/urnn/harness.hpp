#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "urnn/checkpoint.hpp"
#include "urnn/model.hpp"

namespace urnn {

enum class ModelKind { kUrnn, kRnnTanh, kIrnn, kLstm };
enum class TaskName { kCopy, kAdding, kMnist, kMnistPermuted };

struct RunConfig {
  ModelKind model = ModelKind::kUrnn;
  TaskName task = TaskName::kCopy;
  size_t T = 100;
  size_t n_h = 128;
  double lr = 1e-3;
  double decay = 0.9;
  size_t batch = 20;
  size_t iters = 1000;
  uint64_t seed = 42;
  std::optional<double> clip;  // absent by default; the uRNN needs none
  size_t eval_every = 50;
  size_t eval_batch = 100;
  std::string out;        // metrics CSV path ("" = do not write)
  std::string save;       // checkpoint path ("" = do not save)
  std::string data_dir = "data";  // MNIST IDX files
  size_t train_limit = 0;  // 0 = full set
  size_t test_limit = 0;
  double stop_at_loss = 0.0;  // > 0: stop once eval loss falls below

  // Flat "key = value" round trip (config files and checkpoint echo).
  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  void validate() const;

  size_t task_n_in() const;
  size_t task_n_o() const;
};

std::string to_string(ModelKind m);
std::string to_string(TaskName t);
ModelKind model_kind_from_string(const std::string& s);
TaskName task_name_from_string(const std::string& s);

struct MetricsRecord {
  size_t iter = 0;
  double train_loss = 0.0;
  double eval_loss = 0.0;
  double eval_metric = 0.0;
  double wallclock_s = 0.0;
};

// Builds the configured model with its initialization applied.
std::unique_ptr<SequenceModel> make_model(const RunConfig& cfg);

// Runs the configured optimization, evaluating on held-out data every
// eval_every iterations; writes cfg.out (schema
// "iter,train_loss,eval_loss,eval_metric,wallclock_s") and the final
// checkpoint when requested. A non-finite loss aborts with a diagnostic
// checkpoint next to cfg.out.
std::vector<MetricsRecord> run_training(const RunConfig& cfg);

enum class ProbeKind { kGradNorms, kHiddenNorms };

struct ProbeResult {
  // grad_norms: value = ||dC/dh_t||. hidden_norms: value = ||h_t||,
  // aux = ||h_t - h_T||.
  std::vector<double> value;
  std::vector<double> aux;
};

// Probes the checkpointed model on a fresh batch of its task at horizon
// T_eval; writes "t,value" or "t,norm,dist_to_final" CSV when out != "".
ProbeResult run_probes(const Checkpoint& ck, ProbeKind probe, size_t T_eval,
                       const std::string& out);

// Loss/metric of a checkpointed model on fresh evaluation data.
MetricsRecord run_eval(const Checkpoint& ck, const std::string& out);

}  // namespace urnn
