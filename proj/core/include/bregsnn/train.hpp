#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bregsnn/dataset.hpp"
#include "bregsnn/network.hpp"
#include "bregsnn/optim.hpp"
#include "bregsnn/prox.hpp"

namespace bregsnn {

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  OptimConfig optim;
  double lambda = 0.0;
  // Input dropout: each (timestep, channel) entry is zeroed with this
  // probability during training (inverted scaling keeps the expected
  // input current unchanged). Evaluation always runs without dropout.
  double dropout = 0.0;
  // Dropout on hidden-layer spikes, same inverted-scaling convention.
  double spike_dropout = 0.0;
  // Warm-start bound: v0 = theta0 + min(lambda, cap)*sign(theta0). Weights
  // start at most cap outside the threshold band, so lambda beyond the cap
  // shrinks the initial weights instead of inflating the shadows.
  double shadow_offset_cap = 0.6;
  ScheduleKind schedule = ScheduleKind::OneCycle;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;
  std::uint64_t seed = 1;
};

struct EpochLog {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t nonzero_count = 0;
  double nonzero_fraction = 0.0;
  double lr = 0.0;
};

inline const char* kMetricsHeader =
    "epoch,split,loss,accuracy,nonzero_count,nonzero_fraction,lr";

std::string to_csv_row(const EpochLog& log);

// loss = -log softmax(logits)[label] with max-subtraction stabilization;
// dlogits = softmax(logits) - onehot(label).
struct LossGrad {
  double loss;
  Tensor dlogits;
};
LossGrad cross_entropy(const Tensor& logits, std::size_t label);

// A network plus one optimizer state per parameter tensor. Weight matrices
// (W and R) carry the L1 prox; biases are unregularized.
struct TrainState {
  Network net;
  std::vector<ParamState> states;

  std::vector<NamedTensor> param_groups() const;
  SparsityReport sparsity() const;
  // Copies optimizer thetas into the network tensors.
  void sync_network();
};

TrainState make_train_state(const NetworkSpec& spec, double lambda, Rng& rng,
                            double offset_cap = 0.6);
TrainState train_state_from_checkpoint(const NetworkSpec& spec,
                                       std::vector<ParamState> states);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
};
EvalResult evaluate(const Network& net, const SpikeDataset& ds);

// One pass over shuffled mini-batches; mean gradient per batch, one
// optimizer step per parameter group. Throws DivergenceError on any
// non-finite loss or update.
EpochLog train_epoch(TrainState& ts, const SpikeDataset& ds_train,
                     const TrainConfig& cfg, const LrSchedule& schedule,
                     std::uint64_t& global_step, std::size_t epoch, Rng& rng);

struct RunResult {
  std::vector<EpochLog> logs;
  double best_val_accuracy = 0.0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  SparsityReport init_report;
  SparsityReport final_report;
  std::vector<ParamState> best_states;   // checkpoint at peak val accuracy
  std::vector<ParamState> final_states;
};

// metrics_csv_path, when non-empty, receives rows incrementally so a
// diverged run still leaves its partial log behind.
RunResult run_training(const NetworkSpec& net_spec, const SpikeDataset& train,
                       const SpikeDataset& val, const SpikeDataset& test,
                       const TrainConfig& cfg,
                       const std::string& metrics_csv_path = "");

struct SweepRow {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  double peak_val_acc = 0.0;
  double final_nonzero_frac = 0.0;
  double test_acc = 0.0;
  bool diverged = false;
};

struct SweepAggregate {
  double lambda = 0.0;
  double mean_peak_val_acc = 0.0;
  double mean_final_nonzero_frac = 0.0;
  double mean_test_acc = 0.0;
  std::size_t completed = 0;
  std::size_t diverged = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;

  std::string rows_csv() const;
  std::string aggregates_csv() const;
};

// One run per (lambda, repeat); repeat r uses seed cfg.seed + r. Diverged
// runs are recorded and excluded from means. Runs execute in parallel,
// capped by BREG_SNN_THREADS (default: hardware concurrency).
SweepResult lambda_sweep(const NetworkSpec& net_spec, const SpikeDataset& train,
                         const SpikeDataset& val, const SpikeDataset& test,
                         const TrainConfig& cfg,
                         const std::vector<double>& lambdas,
                         std::size_t repeats);

}  // namespace bregsnn
