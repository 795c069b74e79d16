// End-to-end checks of the installed command-line surface.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(URNN_CLI_PATH) + " " + args +
                          " > /tmp/urnn_cli_stdout.txt 2>/tmp/urnn_cli_err.txt";
  return std::system(cmd.c_str());
}

std::string first_line(const std::string& path) {
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  return line;
}

}  // namespace

TEST_CASE("cli: train with --iters 0 writes the metrics schema") {
  REQUIRE(run("train --model urnn --task copy --T 3 --hidden 8 --batch 2 "
              "--eval_batch 2 --iters 0 --seed 1 --out /tmp/cli_m.csv") == 0);
  CHECK(first_line("/tmp/cli_m.csv") ==
        "iter,train_loss,eval_loss,eval_metric,wallclock_s");
}

TEST_CASE("cli: train/probe/eval round trip through a checkpoint") {
  REQUIRE(run("train --model rnn_tanh --task adding --T 5 --hidden 4 "
              "--batch 2 --eval_batch 2 --iters 4 --eval_every 2 --seed 3 "
              "--clip 1.0 --save /tmp/cli_ck.ckpt") == 0);
  REQUIRE(run("probe --checkpoint /tmp/cli_ck.ckpt --probe grad_norms "
              "--T 7 --out /tmp/cli_probe.csv") == 0);
  CHECK(first_line("/tmp/cli_probe.csv") == "t,value");
  REQUIRE(run("probe --checkpoint /tmp/cli_ck.ckpt --probe hidden_norms "
              "--T 7 --out /tmp/cli_probe2.csv") == 0);
  CHECK(first_line("/tmp/cli_probe2.csv") == "t,norm,dist_to_final");
  REQUIRE(run("eval --checkpoint /tmp/cli_ck.ckpt --out /tmp/cli_eval.csv") ==
          0);
  CHECK(first_line("/tmp/cli_eval.csv") ==
        "iter,train_loss,eval_loss,eval_metric,wallclock_s");
}

TEST_CASE("cli: config file values are applied and flags override them") {
  {
    std::ofstream f("/tmp/cli_cfg.txt");
    f << "model = urnn\ntask = copy\nT = 3\nhidden = 8\nbatch = 2\n"
      << "eval_batch = 2\niters = 0\nseed = 9\nout = /tmp/cli_cfg_m.csv\n";
  }
  REQUIRE(run("train --config /tmp/cli_cfg.txt") == 0);
  CHECK(first_line("/tmp/cli_cfg_m.csv") ==
        "iter,train_loss,eval_loss,eval_metric,wallclock_s");

  // The flag wins over the file.
  REQUIRE(run("train --config /tmp/cli_cfg.txt --out /tmp/cli_cfg_m2.csv") ==
          0);
  CHECK(first_line("/tmp/cli_cfg_m2.csv") ==
        "iter,train_loss,eval_loss,eval_metric,wallclock_s");
}

TEST_CASE("cli: invalid usage fails with a nonzero exit") {
  CHECK(run("train --model bogus --task copy --iters 0") != 0);
  CHECK(run("probe --probe grad_norms") != 0);  // missing checkpoint
  CHECK(run("eval --checkpoint /tmp/does_not_exist.ckpt") != 0);
  CHECK(run("") != 0);  // subcommand required
}
