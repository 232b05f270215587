#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bregsnn/prox.hpp"
#include "bregsnn/tensor.hpp"

namespace bregsnn {

enum class Algorithm { SGD, Adam, LinBreg, AdaBreg };

Algorithm algorithm_from_string(const std::string& s);
std::string to_string(Algorithm a);

struct OptimConfig {
  Algorithm algorithm = Algorithm::AdaBreg;
  double mu = 1e-3;  // base learning rate
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One parameter group. theta is the model-visible value; v is the shadow
// iterate. Invariant after init and after every step:
//   theta == soft_threshold(v, lambda)  when regularized,
//   theta == v                          otherwise.
struct ParamState {
  std::string name;
  Tensor theta;
  Tensor v;
  Tensor m;
  Tensor s;
  std::uint64_t t = 0;
  ProxSpec prox;
  bool regularized = false;
};

ParamState init_param_state(std::string name, const Tensor& theta_init,
                            const ProxSpec& prox, bool regularized);

// All steps mutate the state in place and throw DivergenceError on a
// non-finite update.
void sgd_step(ParamState& state, const Tensor& grad, double lr);
void adam_step(ParamState& state, const Tensor& grad, const OptimConfig& cfg,
               double lr);
void linbreg_step(ParamState& state, const Tensor& grad, double lr);
void adabreg_step(ParamState& state, const Tensor& grad,
                  const OptimConfig& cfg, double lr);

// Dispatch on cfg.algorithm.
void optim_step(ParamState& state, const Tensor& grad, const OptimConfig& cfg,
                double lr);

enum class ScheduleKind { Constant, OneCycle };

// Constant: max_lr everywhere. OneCycle: cosine ramp from max_lr/div_factor
// up to max_lr over pct_start*total_steps, then cosine anneal down to
// max_lr/final_div_factor at total_steps. Steps past the end clamp to the
// final value.
struct LrSchedule {
  ScheduleKind kind = ScheduleKind::Constant;
  double max_lr = 1e-3;
  std::uint64_t total_steps = 1;
  double pct_start = 0.3;
  double div_factor = 25.0;
  double final_div_factor = 1e4;

  static LrSchedule constant(double lr) {
    LrSchedule s;
    s.kind = ScheduleKind::Constant;
    s.max_lr = lr;
    return s;
  }

  static LrSchedule one_cycle(double max_lr, std::uint64_t total_steps,
                              double pct_start = 0.3, double div_factor = 25.0,
                              double final_div_factor = 1e4);
};

double lr_at(const LrSchedule& schedule, std::uint64_t step);

// SNNC checkpoint: binary, little-endian. Round trip is bit-exact.
void save_checkpoint(const std::vector<ParamState>& states,
                     const std::string& path);
std::vector<ParamState> load_checkpoint(const std::string& path);

}  // namespace bregsnn
