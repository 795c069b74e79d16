#include "urnn/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "urnn/models.hpp"
#include "urnn/optim.hpp"
#include "urnn/rng.hpp"
#include "urnn/tasks.hpp"

namespace urnn {

namespace {

constexpr uint64_t kTagTrainData = 101, kTagEvalData = 102, kTagProbe = 103,
                   kTagEpoch = 104, kTagPixelPerm = 105;

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::kUrnn: return "urnn";
    case ModelKind::kRnnTanh: return "rnn_tanh";
    case ModelKind::kIrnn: return "irnn";
    case ModelKind::kLstm: return "lstm";
  }
  return "?";
}

std::string to_string(TaskName t) {
  switch (t) {
    case TaskName::kCopy: return "copy";
    case TaskName::kAdding: return "adding";
    case TaskName::kMnist: return "mnist";
    case TaskName::kMnistPermuted: return "mnist_permuted";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "urnn") return ModelKind::kUrnn;
  if (s == "rnn_tanh") return ModelKind::kRnnTanh;
  if (s == "irnn") return ModelKind::kIrnn;
  if (s == "lstm") return ModelKind::kLstm;
  throw std::invalid_argument("unknown model: " + s);
}

TaskName task_name_from_string(const std::string& s) {
  if (s == "copy") return TaskName::kCopy;
  if (s == "adding") return TaskName::kAdding;
  if (s == "mnist") return TaskName::kMnist;
  if (s == "mnist_permuted") return TaskName::kMnistPermuted;
  throw std::invalid_argument("unknown task: " + s);
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  char buf[64];
  os << "model = " << urnn::to_string(model) << "\n";
  os << "task = " << urnn::to_string(task) << "\n";
  os << "T = " << T << "\n";
  os << "hidden = " << n_h << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", lr);
  os << "lr = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.17g", decay);
  os << "decay = " << buf << "\n";
  os << "batch = " << batch << "\n";
  os << "iters = " << iters << "\n";
  os << "seed = " << seed << "\n";
  if (clip) {
    std::snprintf(buf, sizeof buf, "%.17g", *clip);
    os << "clip = " << buf << "\n";
  }
  os << "eval_every = " << eval_every << "\n";
  os << "eval_batch = " << eval_batch << "\n";
  if (!out.empty()) os << "out = " << out << "\n";
  if (!save.empty()) os << "save = " << save << "\n";
  os << "data_dir = " << data_dir << "\n";
  if (train_limit) os << "train_limit = " << train_limit << "\n";
  if (test_limit) os << "test_limit = " << test_limit << "\n";
  if (stop_at_loss > 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", stop_at_loss);
    os << "stop_at_loss = " << buf << "\n";
  }
  return os.str();
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config: expected key = value, got: " + t);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key == "model") cfg.model = model_kind_from_string(val);
    else if (key == "task") cfg.task = task_name_from_string(val);
    else if (key == "T") cfg.T = std::stoull(val);
    else if (key == "hidden") cfg.n_h = std::stoull(val);
    else if (key == "lr") cfg.lr = std::stod(val);
    else if (key == "decay") cfg.decay = std::stod(val);
    else if (key == "batch") cfg.batch = std::stoull(val);
    else if (key == "iters") cfg.iters = std::stoull(val);
    else if (key == "seed") cfg.seed = std::stoull(val);
    else if (key == "clip") cfg.clip = std::stod(val);
    else if (key == "eval_every") cfg.eval_every = std::stoull(val);
    else if (key == "eval_batch") cfg.eval_batch = std::stoull(val);
    else if (key == "out") cfg.out = val;
    else if (key == "save") cfg.save = val;
    else if (key == "data_dir") cfg.data_dir = val;
    else if (key == "train_limit") cfg.train_limit = std::stoull(val);
    else if (key == "test_limit") cfg.test_limit = std::stoull(val);
    else if (key == "stop_at_loss") cfg.stop_at_loss = std::stod(val);
    else throw std::invalid_argument("config: unknown key: " + key);
  }
  return cfg;
}

void RunConfig::validate() const {
  if (model == ModelKind::kUrnn && !is_power_of_two(n_h)) {
    throw std::invalid_argument(
        "config: hidden size must be a power of two for the urnn");
  }
  if (batch == 0) throw std::invalid_argument("config: batch must be > 0");
  if (eval_every == 0) {
    throw std::invalid_argument("config: eval_every must be > 0");
  }
  if (eval_batch == 0) {
    throw std::invalid_argument("config: eval_batch must be > 0");
  }
  if (clip && *clip <= 0.0) {
    throw std::invalid_argument("config: clip must be > 0");
  }
  if ((task == TaskName::kCopy || task == TaskName::kAdding) && T < 2) {
    throw std::invalid_argument("config: T must be >= 2");
  }
}

size_t RunConfig::task_n_in() const {
  switch (task) {
    case TaskName::kCopy: return 10;
    case TaskName::kAdding: return 2;
    default: return 1;
  }
}

size_t RunConfig::task_n_o() const {
  switch (task) {
    case TaskName::kCopy: return 9;
    case TaskName::kAdding: return 1;
    default: return 10;
  }
}

std::unique_ptr<SequenceModel> make_model(const RunConfig& cfg) {
  const size_t n_in = cfg.task_n_in();
  const size_t n_o = cfg.task_n_o();
  switch (cfg.model) {
    case ModelKind::kUrnn: {
      auto m = std::make_unique<UrnnModel>(n_in, cfg.n_h, n_o, 0);
      m->params() = init_urnn(n_in, cfg.n_h, n_o, cfg.seed);
      return m;
    }
    case ModelKind::kRnnTanh: {
      auto m = std::make_unique<RnnModel>(n_in, cfg.n_h, n_o,
                                          RnnActivation::kTanh);
      m->params() = init_rnn(n_in, cfg.n_h, n_o, RnnActivation::kTanh,
                             cfg.seed);
      return m;
    }
    case ModelKind::kIrnn: {
      auto m = std::make_unique<RnnModel>(n_in, cfg.n_h, n_o,
                                          RnnActivation::kRelu);
      m->params() = init_rnn(n_in, cfg.n_h, n_o, RnnActivation::kRelu,
                             cfg.seed);
      return m;
    }
    case ModelKind::kLstm: {
      auto m = std::make_unique<LstmModel>(n_in, cfg.n_h, n_o);
      m->params() = init_lstm(n_in, cfg.n_h, n_o, cfg.seed);
      return m;
    }
  }
  throw std::logic_error("make_model: bad model kind");
}

namespace {

// Deterministic source of training/evaluation batches for all tasks.
class BatchSource {
 public:
  explicit BatchSource(const RunConfig& cfg) : cfg_(cfg) {
    if (cfg.task == TaskName::kMnist || cfg.task == TaskName::kMnistPermuted) {
      const std::string d = cfg.data_dir;
      train_ = load_mnist_idx(d + "/train-images-idx3-ubyte",
                              d + "/train-labels-idx1-ubyte");
      test_ = load_mnist_idx(d + "/t10k-images-idx3-ubyte",
                             d + "/t10k-labels-idx1-ubyte");
      if (cfg.task == TaskName::kMnistPermuted) {
        const uint64_t ps = derive_seed(cfg.seed, kTagPixelPerm);
        train_ = permute_pixels(train_, ps);
        test_ = permute_pixels(test_, ps);
      }
      if (cfg.train_limit && cfg.train_limit < train_.count) {
        train_count_ = cfg.train_limit;
      } else {
        train_count_ = train_.count;
      }
      if (cfg.test_limit && cfg.test_limit < test_.count) {
        test_count_ = cfg.test_limit;
      } else {
        test_count_ = test_.count;
      }
    }
  }

  TaskBatch train_batch(size_t iter) {
    switch (cfg_.task) {
      case TaskName::kCopy:
        return gen_copy_batch(cfg_.T, cfg_.batch,
                              derive_seed(cfg_.seed, kTagTrainData, iter));
      case TaskName::kAdding:
        return gen_adding_batch(cfg_.T, cfg_.batch,
                                derive_seed(cfg_.seed, kTagTrainData, iter));
      default: {
        std::vector<size_t> idx(cfg_.batch);
        for (size_t j = 0; j < cfg_.batch; ++j) {
          if (cursor_ == 0) reshuffle();
          idx[j] = order_[order_.size() - cursor_];
          --cursor_;
        }
        return mnist_batch(train_, idx);
      }
    }
  }

  TaskBatch eval_batch(size_t k) const {
    switch (cfg_.task) {
      case TaskName::kCopy:
        return gen_copy_batch(cfg_.T, cfg_.eval_batch,
                              derive_seed(cfg_.seed, kTagEvalData, k));
      case TaskName::kAdding:
        return gen_adding_batch(cfg_.T, cfg_.eval_batch,
                                derive_seed(cfg_.seed, kTagEvalData, k));
      default: {
        std::vector<size_t> idx(test_count_);
        for (size_t j = 0; j < test_count_; ++j) idx[j] = j;
        return mnist_batch(test_, idx);
      }
    }
  }

 private:
  void reshuffle() {
    const auto perm =
        random_permutation(train_count_, derive_seed(cfg_.seed, kTagEpoch, epoch_));
    order_.assign(perm.begin(), perm.end());
    cursor_ = order_.size();
    ++epoch_;
  }

  const RunConfig cfg_;
  MnistSet train_, test_;
  size_t train_count_ = 0, test_count_ = 0;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  size_t epoch_ = 0;
};

void write_metrics(std::ofstream& f, const MetricsRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.3f\n", r.iter,
                r.train_loss, r.eval_loss, r.eval_metric, r.wallclock_s);
  f << buf;
  f.flush();  // keep the file tailable during long runs
}

}  // namespace

std::vector<MetricsRecord> run_training(const RunConfig& cfg) {
  cfg.validate();
  auto model = make_model(cfg);
  RmsProp opt(cfg.lr, cfg.decay, model->flat_size());
  BatchSource source(cfg);

  std::ofstream mf;
  if (!cfg.out.empty()) {
    mf.open(cfg.out, std::ios::trunc);
    if (!mf) throw std::runtime_error("cannot open metrics file " + cfg.out);
    mf << "iter,train_loss,eval_loss,eval_metric,wallclock_s\n";
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  std::vector<MetricsRecord> records;
  std::vector<double> flat(model->flat_size()), grad;
  size_t eval_index = 0;

  auto emit = [&](size_t iter, double train_loss) {
    MetricsRecord r;
    r.iter = iter;
    r.train_loss = train_loss;
    r.eval_loss = model->evaluate(source.eval_batch(eval_index), &r.eval_metric);
    ++eval_index;
    r.wallclock_s = elapsed();
    records.push_back(r);
    if (mf) write_metrics(mf, r);
    return r;
  };

  auto diag_abort = [&](size_t iter, const std::string& why) {
    std::string diag;
    if (!cfg.out.empty()) {
      diag = cfg.out + ".diag.ckpt";
      save_checkpoint(diag, *model, &opt, cfg.to_text());
    }
    throw std::runtime_error("run_training: " + why + " at iteration " +
                             std::to_string(iter) +
                             (diag.empty() ? "" : "; diagnostic checkpoint " +
                                                      diag));
  };

  // Untrained record; batch index 0 is reserved for it.
  emit(0, model->evaluate(source.train_batch(0), nullptr));

  for (size_t iter = 1; iter <= cfg.iters; ++iter) {
    const TaskBatch tb = source.train_batch(iter);
    const double loss = model->batch_grad(tb, grad);
    if (!std::isfinite(loss)) diag_abort(iter, "non-finite loss");
    if (cfg.clip) clip_gradients(grad, *cfg.clip);
    model->to_flat(flat.data());
    try {
      opt.step(flat, grad);
    } catch (const std::runtime_error& e) {
      diag_abort(iter, e.what());
    }
    model->from_flat(flat.data());

    if (iter % cfg.eval_every == 0 || iter == cfg.iters) {
      const MetricsRecord r = emit(iter, loss);
      if (cfg.stop_at_loss > 0.0 && r.eval_loss < cfg.stop_at_loss) break;
    }
  }

  if (!cfg.save.empty()) {
    save_checkpoint(cfg.save, *model, &opt, cfg.to_text());
  }
  return records;
}

ProbeResult run_probes(const Checkpoint& ck, ProbeKind probe, size_t T_eval,
                       const std::string& out) {
  RunConfig cfg = RunConfig::from_text(ck.config_text);
  cfg.T = T_eval;
  auto model = make_model(cfg);
  restore_model(ck, *model, nullptr);

  BatchSource source(cfg);
  const TaskBatch tb = [&] {
    switch (cfg.task) {
      case TaskName::kCopy:
        return gen_copy_batch(cfg.T, cfg.batch,
                              derive_seed(cfg.seed, kTagProbe));
      case TaskName::kAdding:
        return gen_adding_batch(cfg.T, cfg.batch,
                                derive_seed(cfg.seed, kTagProbe));
      default:
        return source.eval_batch(0);
    }
  }();

  ProbeResult res;
  if (probe == ProbeKind::kGradNorms) {
    std::vector<double> grad;
    model->batch_grad(tb, grad, &res.value);
  } else {
    model->hidden_norms(tb, res.value, res.aux);
  }

  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open probe file " + out);
    char buf[120];
    if (probe == ProbeKind::kGradNorms) {
      f << "t,value\n";
      for (size_t t = 0; t < res.value.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", t + 1, res.value[t]);
        f << buf;
      }
    } else {
      f << "t,norm,dist_to_final\n";
      for (size_t t = 0; t < res.value.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", t + 1,
                      res.value[t], res.aux[t]);
        f << buf;
      }
    }
  }
  return res;
}

MetricsRecord run_eval(const Checkpoint& ck, const std::string& out) {
  const RunConfig cfg = RunConfig::from_text(ck.config_text);
  auto model = make_model(cfg);
  restore_model(ck, *model, nullptr);
  BatchSource source(cfg);
  MetricsRecord r;
  r.iter = cfg.iters;
  r.eval_loss = model->evaluate(source.eval_batch(0), &r.eval_metric);
  r.train_loss = r.eval_loss;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open eval file " + out);
    f << "iter,train_loss,eval_loss,eval_metric,wallclock_s\n";
    write_metrics(f, r);
  }
  return r;
}

}  // namespace urnn
