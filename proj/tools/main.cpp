// bregsnn: sparse SNN training with linearized Bregman optimizers.
// Subcommands: gen-data | train | eval | sweep | inspect.
// Exit codes: 0 success, 1 I/O error, 2 usage error, 3 divergence.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "bregsnn/config.hpp"
#include "bregsnn/dataset.hpp"
#include "bregsnn/errors.hpp"
#include "bregsnn/train.hpp"

namespace fs = std::filesystem;
using namespace bregsnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

struct Overrides {
  double lambda = -1.0;
  double lr = -1.0;
  std::string optimizer;
  long epochs = -1;
  long batch_size = -1;
  long seed = -1;
  bool no_scheduler = false;
  std::string dataset;
  std::string net;
  std::string output_dir;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--lambda", ov.lambda, "Sparsity parameter lambda");
  cmd->add_option("--lr", ov.lr, "Base learning rate");
  cmd->add_option("--optimizer", ov.optimizer,
                  "Optimizer: sgd|adam|linbreg|adabreg");
  cmd->add_option("--epochs", ov.epochs, "Number of epochs");
  cmd->add_option("--batch-size", ov.batch_size, "Mini-batch size");
  cmd->add_option("--seed", ov.seed, "Run seed");
  cmd->add_flag("--no-scheduler", ov.no_scheduler,
                "Use a constant learning rate instead of OneCycle");
  cmd->add_option("--dataset", ov.dataset, "SPK1 dataset path");
  cmd->add_option("--net", ov.net, "Network spec, e.g. \"40 64 64r 10\"");
  cmd->add_option("--output", ov.output_dir, "Output directory");
}

// Flag overrides strictly win over file values.
void apply(RunConfig& cfg, const Overrides& ov) {
  if (ov.lambda >= 0.0) cfg.train.lambda = ov.lambda;
  if (ov.lr > 0.0) cfg.train.optim.mu = ov.lr;
  if (!ov.optimizer.empty())
    cfg.train.optim.algorithm = algorithm_from_string(ov.optimizer);
  if (ov.epochs >= 0) cfg.train.epochs = static_cast<std::size_t>(ov.epochs);
  if (ov.batch_size > 0)
    cfg.train.batch_size = static_cast<std::size_t>(ov.batch_size);
  if (ov.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(ov.seed);
  if (ov.no_scheduler) cfg.train.schedule = ScheduleKind::Constant;
  if (!ov.dataset.empty()) cfg.dataset = ov.dataset;
  if (!ov.net.empty()) cfg.net = ov.net;
  if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
}

RunConfig effective_config(const std::string& config_path,
                           const Overrides& ov) {
  RunConfig cfg =
      config_path.empty() ? RunConfig{} : load_run_config(config_path);
  apply(cfg, ov);
  std::cout << "# effective configuration\n" << to_text(cfg) << std::flush;
  return cfg;
}

SplitResult load_splits(const RunConfig& cfg) {
  if (cfg.dataset.empty()) throw ConfigError("no dataset configured");
  const SpikeDataset ds = load_dataset(cfg.dataset);
  Rng rng(cfg.split_seed);
  return split(ds, cfg.train_frac, cfg.val_frac, cfg.test_frac, rng);
}

int cmd_gen_data(const std::string& task, const std::string& out,
                 std::uint64_t seed, PatternTaskConfig pattern,
                 SequentialPixelConfig seqpix, std::size_t bin) {
  Rng rng(seed);
  SpikeDataset ds;
  if (task == "pattern")
    ds = gen_pattern_task(rng, pattern);
  else if (task == "seqpix")
    ds = gen_sequential_pixels(rng, seqpix);
  else
    throw ConfigError("unknown task: " + task + " (expected pattern|seqpix)");
  if (bin > 1) ds = bin_channels(ds, bin);
  save_dataset(ds, out);
  std::cout << "wrote " << out << ": name=" << ds.name << " N=" << ds.size()
            << " T=" << ds.T << " C=" << ds.C
            << " classes=" << ds.num_classes << '\n';
  return kExitOk;
}

int cmd_train(const std::string& config_path, const Overrides& ov) {
  const RunConfig cfg = effective_config(config_path, ov);
  const SplitResult splits = load_splits(cfg);
  fs::create_directories(cfg.output_dir);
  const std::string metrics = cfg.output_dir + "/metrics.csv";
  const std::string ckpt = cfg.output_dir + "/checkpoint.snnc";

  try {
    RunResult rr = run_training(cfg.network_spec(), splits.train, splits.val,
                                splits.test, cfg.train, metrics);
    save_checkpoint(rr.best_states, ckpt);
    std::ofstream sparsity(cfg.output_dir + "/sparsity.csv");
    sparsity << rr.final_report.to_csv();
    std::cout << "best val accuracy: " << rr.best_val_accuracy << '\n'
              << "test accuracy:     " << rr.test_accuracy << '\n'
              << "nonzero fraction:  " << rr.final_report.nonzero_fraction()
              << '\n'
              << "metrics: " << metrics << "\ncheckpoint: " << ckpt << '\n';
    return kExitOk;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged at epoch " << e.epoch << " (step " << e.step
              << "): " << e.what() << '\n';
    return kExitDiverged;
  }
}

int cmd_eval(const std::string& config_path, const Overrides& ov,
             const std::string& ckpt_path) {
  const RunConfig cfg = effective_config(config_path, ov);
  const SplitResult splits = load_splits(cfg);
  TrainState ts = train_state_from_checkpoint(cfg.network_spec(),
                                              load_checkpoint(ckpt_path));
  const EvalResult r = evaluate(ts.net, splits.test);
  std::cout << "test loss:     " << r.loss << '\n'
            << "test accuracy: " << r.accuracy << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov,
              const std::vector<double>& lambdas, std::size_t repeats) {
  const RunConfig cfg = effective_config(config_path, ov);
  const SplitResult splits = load_splits(cfg);
  fs::create_directories(cfg.output_dir);

  const SweepResult sr = lambda_sweep(cfg.network_spec(), splits.train,
                                      splits.val, splits.test, cfg.train,
                                      lambdas, repeats);
  {
    std::ofstream runs(cfg.output_dir + "/sweep_runs.csv");
    runs << sr.rows_csv();
    std::ofstream agg(cfg.output_dir + "/sweep_agg.csv");
    agg << sr.aggregates_csv();
  }
  std::size_t completed = 0;
  for (const auto& row : sr.rows)
    if (!row.diverged) ++completed;
  std::cout << "lambda  peak_val_acc  nonzero_frac  diverged\n";
  for (const auto& a : sr.aggregates)
    std::cout << std::setw(6) << a.lambda << "  " << std::setw(12)
              << a.mean_peak_val_acc << "  " << std::setw(12)
              << a.mean_final_nonzero_frac << "  " << a.diverged << '\n';
  return completed > 0 ? kExitOk : kExitDiverged;
}

int cmd_inspect(const std::string& ckpt_path, const std::string& csv_out) {
  const std::vector<ParamState> states = load_checkpoint(ckpt_path);
  std::vector<NamedTensor> groups;
  for (const auto& st : states) groups.push_back({st.name, &st.theta});
  const SparsityReport report = sparsity_report(groups);
  if (!csv_out.empty()) {
    std::ofstream os(csv_out);
    if (!os) throw IoError("cannot open: " + csv_out);
    os << report.to_csv();
  }
  std::cout << std::left << std::setw(16) << "group" << std::right
            << std::setw(10) << "total" << std::setw(10) << "nonzero"
            << std::setw(12) << "fraction" << '\n';
  auto print_row = [](const std::string& name, std::size_t total,
                      std::size_t nonzero) {
    std::cout << std::left << std::setw(16) << name << std::right
              << std::setw(10) << total << std::setw(10) << nonzero
              << std::setw(12) << std::setprecision(4)
              << (total ? static_cast<double>(nonzero) / total : 0.0) << '\n';
  };
  for (const auto& g : report.groups) print_row(g.name, g.total, g.nonzero);
  print_row("TOTAL", report.total, report.nonzero);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse spiking-network training with Bregman optimizers"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_task = "pattern", gen_out;
  std::uint64_t gen_seed = 1;
  std::size_t gen_bin = 1;
  PatternTaskConfig pattern;
  SequentialPixelConfig seqpix;
  gen->add_option("--task", gen_task, "pattern|seqpix")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output SPK1 file")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
  gen->add_option("--classes", pattern.num_classes, "Number of classes")
      ->capture_default_str();
  gen->add_option("--timesteps", pattern.T, "Timesteps per sample")
      ->capture_default_str();
  gen->add_option("--channels", pattern.C, "Input channels")
      ->capture_default_str();
  gen->add_option("--samples-per-class", pattern.samples_per_class,
                  "Samples per class")
      ->capture_default_str();
  gen->add_option("--base-rate", pattern.base_rate, "Mean spike rate")
      ->capture_default_str();
  gen->add_option("--jitter", pattern.jitter, "Per-sample rate jitter")
      ->capture_default_str();
  gen->add_option("--informative", pattern.informative_channels,
                  "Channels with class-specific structure (0 = all)")
      ->capture_default_str();
  gen->add_option("--bin", gen_bin, "Channel binning factor")
      ->capture_default_str();
  gen->add_option("--height", seqpix.height, "Glyph height (seqpix)")
      ->capture_default_str();
  gen->add_option("--width", seqpix.width, "Glyph width (seqpix)")
      ->capture_default_str();
  gen->add_option("--noise", seqpix.noise, "Pixel flip probability (seqpix)")
      ->capture_default_str();
  gen->add_option("--perm-seed", seqpix.permutation_seed,
                  "Time-axis permutation seed (seqpix)")
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a network");
  std::string train_cfg;
  Overrides train_ov;
  train->add_option("-c,--config", train_cfg, "Run config file");
  add_override_flags(train, train_ov);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_cfg, eval_ckpt;
  Overrides eval_ov;
  eval->add_option("-c,--config", eval_cfg, "Run config file");
  eval->add_option("--checkpoint", eval_ckpt, "SNNC checkpoint")->required();
  add_override_flags(eval, eval_ov);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Sweep lambda values");
  std::string sweep_cfg;
  Overrides sweep_ov;
  std::vector<double> sweep_lambdas;
  std::size_t sweep_repeats = 3;
  sweep->add_option("-c,--config", sweep_cfg, "Run config file");
  sweep->add_option("--lambdas", sweep_lambdas, "Lambda values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--repeats", sweep_repeats, "Seeds per lambda")
      ->capture_default_str();
  add_override_flags(sweep, sweep_ov);

  // inspect
  auto* inspect = app.add_subcommand("inspect", "Per-layer sparsity table");
  std::string inspect_ckpt, inspect_csv;
  inspect->add_option("checkpoint", inspect_ckpt, "SNNC checkpoint")
      ->required();
  inspect->add_option("--csv", inspect_csv, "Also write CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      seqpix.num_classes = pattern.num_classes;
      seqpix.samples_per_class = pattern.samples_per_class;
      return cmd_gen_data(gen_task, gen_out, gen_seed, pattern, seqpix,
                          gen_bin);
    }
    if (train->parsed()) return cmd_train(train_cfg, train_ov);
    if (eval->parsed()) return cmd_eval(eval_cfg, eval_ov, eval_ckpt);
    if (sweep->parsed())
      return cmd_sweep(sweep_cfg, sweep_ov, sweep_lambdas, sweep_repeats);
    if (inspect->parsed()) return cmd_inspect(inspect_ckpt, inspect_csv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitUsage;
}
