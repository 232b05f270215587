#include "bregsnn/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "bregsnn/errors.hpp"

namespace bregsnn {

std::string to_csv_row(const EpochLog& log) {
  std::ostringstream os;
  os.precision(17);
  os << log.epoch << ',' << log.split << ',' << log.loss << ','
     << log.accuracy << ',' << log.nonzero_count << ','
     << log.nonzero_fraction << ',' << log.lr;
  return os.str();
}

LossGrad cross_entropy(const Tensor& logits, std::size_t label) {
  const std::size_t k = logits.size();
  if (label >= k) throw ShapeError("cross_entropy: label out of range");
  double mx = logits[0];
  for (std::size_t i = 1; i < k; ++i) mx = std::max(mx, logits[i]);
  double z = 0.0;
  Tensor p(logits.shape());
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (std::size_t i = 0; i < k; ++i) p[i] /= z;
  const double loss = -(logits[label] - mx - std::log(z));
  p[label] -= 1.0;
  return {loss, std::move(p)};
}

std::vector<NamedTensor> TrainState::param_groups() const {
  std::vector<NamedTensor> groups;
  for (const auto& st : states) groups.push_back({st.name, &st.theta});
  return groups;
}

SparsityReport TrainState::sparsity() const {
  return sparsity_report(param_groups());
}

void TrainState::sync_network() {
  std::size_t i = 0;
  for (std::size_t l = 0; l < net.params().size(); ++l) {
    auto& p = net.params()[l];
    p.W = states[i++].theta;
    if (p.R.size() > 0) p.R = states[i++].theta;
    p.b = states[i++].theta;
  }
}

namespace {

// Shadow init for weight matrices: v0 = theta0 + min(lambda, cap)*sign(theta0).
// For lambda <= cap, theta = prox(v0) recovers the dense draw exactly and
// every weight starts active; entries are then pruned as training drags
// their v into the threshold band, giving the decreasing nonzero-count
// trajectory. The bare v0 = theta0 init starts already-pruned and the count
// only grows back toward equilibrium. Capping the offset keeps weights
// within pruning reach of the band and lets lambda >> init scale threshold
// the init away entirely instead of being absorbed by the offset.
Tensor offset_shadow(const Tensor& theta, double lambda, double cap) {
  const double off = std::min(lambda, cap);
  Tensor v = theta;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > 0.0)
      v[i] += off;
    else if (v[i] < 0.0)
      v[i] -= off;
  }
  return v;
}

}  // namespace

TrainState make_train_state(const NetworkSpec& spec, double lambda, Rng& rng,
                            double offset_cap) {
  TrainState ts;
  ts.net = Network::build(spec, rng);
  const ProxSpec l1 = ProxSpec::l1(lambda);
  for (std::size_t l = 0; l < ts.net.params().size(); ++l) {
    const auto& p = ts.net.params()[l];
    const std::string base = "layer" + std::to_string(l);
    ts.states.push_back(init_param_state(
        base + ".W", offset_shadow(p.W, lambda, offset_cap), l1, true));
    if (p.R.size() > 0)
      ts.states.push_back(init_param_state(
          base + ".R", offset_shadow(p.R, lambda, offset_cap), l1, true));
    ts.states.push_back(
        init_param_state(base + ".b", p.b, ProxSpec::none(), false));
  }
  ts.sync_network();
  return ts;
}

TrainState train_state_from_checkpoint(const NetworkSpec& spec,
                                       std::vector<ParamState> states) {
  TrainState ts;
  Rng dummy(0);
  ts.net = Network::build(spec, dummy);
  ts.states = std::move(states);
  std::size_t expected = 0;
  for (const auto& p : ts.net.params())
    expected += 2 + (p.R.size() > 0 ? 1 : 0);
  if (ts.states.size() != expected)
    throw ConfigError("checkpoint does not match network spec");
  ts.sync_network();
  return ts;
}

EvalResult evaluate(const Network& net, const SpikeDataset& ds) {
  if (ds.size() == 0) throw ShapeError("evaluate: empty dataset");
  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Tensor logits = net.forward(ds.samples[i]);
    loss_sum += cross_entropy(logits, ds.labels[i]).loss;
    std::size_t arg = 0;
    for (std::size_t j = 1; j < logits.size(); ++j)
      if (logits[j] > logits[arg]) arg = j;   // ties go to the lowest index
    if (arg == ds.labels[i]) ++correct;
  }
  const double n = static_cast<double>(ds.size());
  return {loss_sum / n, static_cast<double>(correct) / n};
}

namespace {

void accumulate(Gradients& acc, const Gradients& g) {
  for (std::size_t l = 0; l < acc.size(); ++l) {
    axpy(acc[l].W, 1.0, g[l].W);
    axpy(acc[l].b, 1.0, g[l].b);
    if (acc[l].R.size() > 0) axpy(acc[l].R, 1.0, g[l].R);
  }
}

// Steps every parameter group with the batch-mean gradients, in the same
// order the states were created (W, [R], b per layer).
void step_all(TrainState& ts, const Gradients& grads, const TrainConfig& cfg,
              double lr, double inv_batch) {
  std::size_t i = 0;
  for (std::size_t l = 0; l < grads.size(); ++l) {
    optim_step(ts.states[i++], scale(grads[l].W, inv_batch), cfg.optim, lr);
    if (grads[l].R.size() > 0)
      optim_step(ts.states[i++], scale(grads[l].R, inv_batch), cfg.optim, lr);
    optim_step(ts.states[i++], scale(grads[l].b, inv_batch), cfg.optim, lr);
  }
  ts.sync_network();
}

}  // namespace

EpochLog train_epoch(TrainState& ts, const SpikeDataset& ds_train,
                     const TrainConfig& cfg, const LrSchedule& schedule,
                     std::uint64_t& global_step, std::size_t epoch, Rng& rng) {
  if (ds_train.size() == 0) throw ShapeError("train_epoch: empty dataset");
  std::vector<std::size_t> order(ds_train.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);

  double loss_sum = 0.0;
  std::size_t correct = 0;
  double last_lr = lr_at(schedule, global_step);
  ts.net.set_spike_dropout(cfg.spike_dropout, &rng);

  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(start + cfg.batch_size, order.size());
    Gradients batch_grads = ts.net.zero_gradients();
    for (std::size_t bi = start; bi < end; ++bi) {
      const std::size_t idx = order[bi];
      NetworkState state;
      Tensor input = ds_train.samples[idx];
      if (cfg.dropout > 0.0) {
        const double keep_scale = 1.0 / (1.0 - cfg.dropout);
        for (std::size_t j = 0; j < input.size(); ++j)
          input[j] = rng.next_double() < cfg.dropout ? 0.0
                                                     : input[j] * keep_scale;
      }
      const Tensor logits = ts.net.forward(input, &state);
      const auto lg = cross_entropy(logits, ds_train.labels[idx]);
      if (!std::isfinite(lg.loss))
        throw DivergenceError("non-finite loss", epoch, global_step);
      loss_sum += lg.loss;
      std::size_t arg = 0;
      for (std::size_t j = 1; j < logits.size(); ++j)
        if (logits[j] > logits[arg]) arg = j;
      if (arg == ds_train.labels[idx]) ++correct;
      accumulate(batch_grads, ts.net.backward(state, lg.dlogits));
    }
    last_lr = lr_at(schedule, global_step);
    try {
      step_all(ts, batch_grads, cfg, last_lr,
               1.0 / static_cast<double>(end - start));
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), epoch, global_step);
    }
    ++global_step;
  }
  ts.net.set_spike_dropout(0.0, nullptr);

  const SparsityReport report = ts.sparsity();
  EpochLog log;
  log.epoch = epoch;
  log.split = "train";
  log.loss = loss_sum / static_cast<double>(ds_train.size());
  if (!std::isfinite(log.loss))
    throw DivergenceError("non-finite epoch loss", epoch, global_step);
  log.accuracy = static_cast<double>(correct) / ds_train.size();
  log.nonzero_count = report.nonzero;
  log.nonzero_fraction = report.nonzero_fraction();
  log.lr = last_lr;
  return log;
}

RunResult run_training(const NetworkSpec& net_spec, const SpikeDataset& train,
                       const SpikeDataset& val, const SpikeDataset& test,
                       const TrainConfig& cfg,
                       const std::string& metrics_csv_path) {
  Rng rng(cfg.seed);
  TrainState ts =
      make_train_state(net_spec, cfg.lambda, rng, cfg.shadow_offset_cap);

  const std::size_t batches_per_epoch =
      (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  LrSchedule schedule;
  if (cfg.schedule == ScheduleKind::OneCycle)
    schedule = LrSchedule::one_cycle(cfg.optim.mu,
                                     cfg.epochs * batches_per_epoch,
                                     cfg.pct_start, cfg.div_factor,
                                     cfg.final_div_factor);
  else
    schedule = LrSchedule::constant(cfg.optim.mu);

  std::ofstream csv;
  if (!metrics_csv_path.empty()) {
    csv.open(metrics_csv_path);
    if (!csv) throw IoError("cannot open metrics file: " + metrics_csv_path);
    csv << kMetricsHeader << '\n';
  }
  auto emit = [&](RunResult& result, const EpochLog& log) {
    result.logs.push_back(log);
    if (csv) csv << to_csv_row(log) << '\n' << std::flush;
  };

  RunResult result;
  result.init_report = ts.sparsity();
  result.best_states = ts.states;
  std::uint64_t global_step = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog train_log =
        train_epoch(ts, train, cfg, schedule, global_step, epoch, rng);
    emit(result, train_log);

    const EvalResult v = evaluate(ts.net, val);
    if (!std::isfinite(v.loss))
      throw DivergenceError("non-finite validation loss", epoch, global_step);
    EpochLog val_log = train_log;
    val_log.split = "val";
    val_log.loss = v.loss;
    val_log.accuracy = v.accuracy;
    emit(result, val_log);

    if (v.accuracy > result.best_val_accuracy) {
      result.best_val_accuracy = v.accuracy;
      result.best_states = ts.states;
    }
  }

  const EvalResult t = evaluate(ts.net, test);
  result.test_loss = t.loss;
  result.test_accuracy = t.accuracy;
  result.final_report = ts.sparsity();
  result.final_states = ts.states;
  return result;
}

std::string SweepResult::rows_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,seed,peak_val_acc,final_nonzero_frac,diverged\n";
  for (const auto& r : rows)
    os << r.lambda << ',' << r.seed << ',' << r.peak_val_acc << ','
       << r.final_nonzero_frac << ',' << (r.diverged ? 1 : 0) << '\n';
  return os.str();
}

std::string SweepResult::aggregates_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "lambda,mean_peak_val_acc,mean_final_nonzero_frac,diverged_runs\n";
  for (const auto& a : aggregates)
    os << a.lambda << ',' << a.mean_peak_val_acc << ','
       << a.mean_final_nonzero_frac << ',' << a.diverged << '\n';
  return os.str();
}

SweepResult lambda_sweep(const NetworkSpec& net_spec, const SpikeDataset& train,
                         const SpikeDataset& val, const SpikeDataset& test,
                         const TrainConfig& cfg,
                         const std::vector<double>& lambdas,
                         std::size_t repeats) {
  if (lambdas.empty()) throw ConfigError("lambda_sweep: empty lambda list");
  if (repeats == 0) throw ConfigError("lambda_sweep: repeats must be >= 1");

  SweepResult result;
  result.rows.resize(lambdas.size() * repeats);

  std::size_t max_threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("BREG_SNN_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) max_threads = static_cast<std::size_t>(v);
  }
  max_threads = std::max<std::size_t>(1, std::min(max_threads,
                                                  result.rows.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= result.rows.size()) return;
      const std::size_t li = job / repeats;
      const std::size_t rep = job % repeats;
      TrainConfig run_cfg = cfg;
      run_cfg.lambda = lambdas[li];
      run_cfg.seed = cfg.seed + rep;
      SweepRow row;
      row.lambda = run_cfg.lambda;
      row.seed = run_cfg.seed;
      try {
        RunResult rr = run_training(net_spec, train, val, test, run_cfg);
        row.peak_val_acc = rr.best_val_accuracy;
        row.final_nonzero_frac = rr.final_report.nonzero_fraction();
        row.test_acc = rr.test_accuracy;
      } catch (const DivergenceError&) {
        row.diverged = true;
      }
      result.rows[job] = row;
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < max_threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    SweepAggregate agg;
    agg.lambda = lambdas[li];
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      const auto& row = result.rows[li * repeats + rep];
      if (row.diverged) {
        ++agg.diverged;
        continue;
      }
      ++agg.completed;
      agg.mean_peak_val_acc += row.peak_val_acc;
      agg.mean_final_nonzero_frac += row.final_nonzero_frac;
      agg.mean_test_acc += row.test_acc;
    }
    if (agg.completed > 0) {
      agg.mean_peak_val_acc /= agg.completed;
      agg.mean_final_nonzero_frac /= agg.completed;
      agg.mean_test_acc /= agg.completed;
    }
    result.aggregates.push_back(agg);
  }
  return result;
}

}  // namespace bregsnn
