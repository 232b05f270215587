#include <cstdio>
#include <fstream>

#include "bregsnn/config.hpp"
#include "bregsnn/errors.hpp"
#include "doctest.h"

using namespace bregsnn;

TEST_CASE("parse_run_config reads keys, comments, blank lines") {
  const RunConfig cfg = parse_run_config(
      "# run settings\n"
      "dataset = data/e.spk1\n"
      "\n"
      "net = 40 64 64r 10   # topology\n"
      "optimizer = adabreg\n"
      "lr = 0.004\n"
      "beta1 = 0.75\n"
      "lambda = 0.615\n"
      "dropout = 0.4\n"
      "shadow_offset_cap = 0.6\n"
      "scheduler = onecycle\n"
      "pct_start = 0.1\n"
      "div_factor = 5\n"
      "final_div_factor = 10\n"
      "batch_size = 1\n"
      "epochs = 100\n"
      "seed = 1\n");
  CHECK(cfg.dataset == "data/e.spk1");
  CHECK(cfg.net == "40 64 64r 10");
  CHECK(cfg.train.optim.algorithm == Algorithm::AdaBreg);
  CHECK(cfg.train.optim.mu == 0.004);
  CHECK(cfg.train.optim.beta1 == 0.75);
  CHECK(cfg.train.lambda == 0.615);
  CHECK(cfg.train.dropout == 0.4);
  CHECK(cfg.train.shadow_offset_cap == 0.6);
  CHECK(cfg.train.schedule == ScheduleKind::OneCycle);
  CHECK(cfg.train.pct_start == 0.1);
  CHECK(cfg.train.batch_size == 1);
  CHECK(cfg.train.epochs == 100);
  CHECK(cfg.train.seed == 1);
  // untouched keys keep their defaults
  CHECK(cfg.train_frac == 0.7);
  CHECK(cfg.split_seed == 42);
  CHECK(cfg.train.optim.beta2 == 0.999);
}

TEST_CASE("defaults without any input") {
  const RunConfig cfg = parse_run_config("");
  CHECK(cfg.net == "40 64 64r 10");
  CHECK(cfg.train.batch_size == 32);
  CHECK(cfg.train.optim.algorithm == Algorithm::AdaBreg);
  CHECK(cfg.train.schedule == ScheduleKind::OneCycle);
  CHECK(cfg.train.spike_dropout == 0.0);
}

TEST_CASE("unknown keys and malformed lines report line numbers") {
  CHECK_THROWS_WITH_AS(parse_run_config("lr = 0.1\nbogus_key = 3\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_run_config("\n\nnot a key value pair\n"),
                       doctest::Contains("line 3"), ConfigError);
}

TEST_CASE("bad values are rejected") {
  CHECK_THROWS_AS(parse_run_config("lr = fast\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("epochs = 3.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("epochs = -2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("optimizer = sgdm\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("scheduler = cosine\n"), ConfigError);
}

TEST_CASE("to_text round trips through the parser") {
  RunConfig cfg;
  cfg.dataset = "x.spk1";
  cfg.net = "20 32r 5";
  cfg.lif_beta = 0.87;
  cfg.train.optim.algorithm = Algorithm::LinBreg;
  cfg.train.optim.mu = 0.123;
  cfg.train.lambda = 0.5;
  cfg.train.spike_dropout = 0.1;
  cfg.train.schedule = ScheduleKind::Constant;
  cfg.train.seed = 77;
  const RunConfig back = parse_run_config(to_text(cfg));
  CHECK(to_text(back) == to_text(cfg));
  CHECK(back.lif_beta == cfg.lif_beta);
  CHECK(back.train.optim.algorithm == Algorithm::LinBreg);
  CHECK(back.train.schedule == ScheduleKind::Constant);
}

TEST_CASE("network_spec applies lif parameters") {
  RunConfig cfg;
  cfg.net = "4 6 2";
  cfg.lif_beta = 0.8;
  cfg.u_th = 1.5;
  cfg.surrogate_k = 5.0;
  const NetworkSpec s = cfg.network_spec();
  CHECK(s.layers[0].lif.beta == 0.8);
  CHECK(s.layers[0].lif.u_th == 1.5);
  CHECK(s.layers[0].lif.surrogate_slope == 5.0);
}

TEST_CASE("load_run_config reads files and reports missing ones") {
  {
    std::ofstream os("cfg_test.txt");
    os << "lambda = 0.3\nseed = 5\n";
  }
  const RunConfig cfg = load_run_config("cfg_test.txt");
  CHECK(cfg.train.lambda == 0.3);
  CHECK(cfg.train.seed == 5);
  std::remove("cfg_test.txt");

  CHECK_THROWS_AS(load_run_config("no_such_config.txt"), IoError);
}
