// Command-line driver: train, probe and eval subcommands over the library.

#include <cstdio>
#include <exception>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "urnn/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unitary-evolution RNN benchmark harness"};
  app.require_subcommand(1);

  std::string model_s = "urnn", task_s = "copy", config_path;
  size_t T = 100, hidden = 128, batch = 20, iters = 1000, eval_every = 50,
         eval_batch = 100, train_limit = 0, test_limit = 0;
  uint64_t seed = 42;
  double lr = 1e-3, decay = 0.9, stop_at_loss = 0.0;
  std::optional<double> clip;
  std::string out, save, data_dir = "data";

  CLI::App* train = app.add_subcommand("train", "run an optimization");
  auto* o_model = train->add_option("--model", model_s,
                                    "urnn|rnn_tanh|irnn|lstm");
  auto* o_task = train->add_option("--task", task_s,
                                   "copy|adding|mnist|mnist_permuted");
  auto* o_T = train->add_option("--T", T, "time lag / sequence horizon");
  auto* o_hidden = train->add_option("--hidden", hidden, "hidden size");
  auto* o_lr = train->add_option("--lr", lr, "RMSProp learning rate");
  auto* o_decay = train->add_option("--decay", decay, "RMSProp decay rate");
  auto* o_batch = train->add_option("--batch", batch, "batch size");
  auto* o_iters = train->add_option("--iters", iters, "optimization steps");
  auto* o_seed = train->add_option("--seed", seed, "master seed");
  auto* o_clip = train->add_option("--clip", clip,
                                   "gradient clipping threshold");
  auto* o_ee = train->add_option("--eval_every", eval_every,
                                 "evaluation period");
  auto* o_eb = train->add_option("--eval_batch", eval_batch,
                                 "evaluation batch size");
  auto* o_out = train->add_option("--out", out, "metrics CSV path");
  auto* o_save = train->add_option("--save", save,
                                   "write the final checkpoint here");
  auto* o_dd = train->add_option("--data_dir", data_dir,
                                 "MNIST IDX directory");
  auto* o_trl = train->add_option("--train_limit", train_limit,
                                  "cap on MNIST training examples (0 = all)");
  auto* o_tel = train->add_option("--test_limit", test_limit,
                                  "cap on MNIST test examples (0 = all)");
  auto* o_stop = train->add_option(
      "--stop_at_loss", stop_at_loss,
      "stop once the evaluation loss falls below this (0 = off)");
  train->add_option("--config", config_path,
                    "flat key = value file; flags override");

  std::string ck_path, probe_s = "grad_norms", out_path;
  size_t T_eval = 100;
  CLI::App* probe = app.add_subcommand("probe", "per-time-step diagnostics");
  probe->add_option("--checkpoint", ck_path, "model checkpoint")->required();
  probe->add_option("--probe", probe_s, "grad_norms|hidden_norms");
  probe->add_option("--T", T_eval, "probe horizon");
  probe->add_option("--out", out_path, "probe CSV path");

  std::string eval_ck, eval_out;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--checkpoint", eval_ck, "model checkpoint")->required();
  eval->add_option("--out", eval_out, "eval CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      urnn::RunConfig cfg;
      if (!config_path.empty()) {
        cfg = urnn::RunConfig::from_text(read_file(config_path));
      }
      if (o_model->count()) cfg.model = urnn::model_kind_from_string(model_s);
      if (o_task->count()) cfg.task = urnn::task_name_from_string(task_s);
      if (o_T->count()) cfg.T = T;
      if (o_hidden->count()) cfg.n_h = hidden;
      if (o_lr->count()) cfg.lr = lr;
      if (o_decay->count()) cfg.decay = decay;
      if (o_batch->count()) cfg.batch = batch;
      if (o_iters->count()) cfg.iters = iters;
      if (o_seed->count()) cfg.seed = seed;
      if (o_clip->count()) cfg.clip = clip;
      if (o_ee->count()) cfg.eval_every = eval_every;
      if (o_eb->count()) cfg.eval_batch = eval_batch;
      if (o_out->count()) cfg.out = out;
      if (o_save->count()) cfg.save = save;
      if (o_dd->count()) cfg.data_dir = data_dir;
      if (o_trl->count()) cfg.train_limit = train_limit;
      if (o_tel->count()) cfg.test_limit = test_limit;
      if (o_stop->count()) cfg.stop_at_loss = stop_at_loss;

      const auto records = urnn::run_training(cfg);
      const urnn::MetricsRecord& last = records.back();
      std::printf("iter %zu train_loss %.6g eval_loss %.6g eval_metric %.6g\n",
                  last.iter, last.train_loss, last.eval_loss,
                  last.eval_metric);
      return 0;
    }
    if (probe->parsed()) {
      urnn::ProbeKind kind;
      if (probe_s == "grad_norms") {
        kind = urnn::ProbeKind::kGradNorms;
      } else if (probe_s == "hidden_norms") {
        kind = urnn::ProbeKind::kHiddenNorms;
      } else {
        std::fprintf(stderr, "unknown probe: %s\n", probe_s.c_str());
        return 2;
      }
      const urnn::Checkpoint ck = urnn::load_checkpoint(ck_path);
      urnn::run_probes(ck, kind, T_eval, out_path);
      return 0;
    }
    if (eval->parsed()) {
      const urnn::Checkpoint ck = urnn::load_checkpoint(eval_ck);
      const urnn::MetricsRecord r = urnn::run_eval(ck, eval_out);
      std::printf("eval_loss %.6g eval_metric %.6g\n", r.eval_loss,
                  r.eval_metric);
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
