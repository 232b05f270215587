#include "bregsnn/optim.hpp"

#include <cmath>

#include "bregsnn/errors.hpp"

namespace bregsnn {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_grad_shape(const ParamState& state, const Tensor& grad) {
  if (!state.v.same_shape(grad))
    throw ShapeError("optimizer step: gradient shape does not match parameter");
}

void check_finite_update(const ParamState& state) {
  if (!all_finite(state.v))
    throw DivergenceError("non-finite parameter update in group " + state.name,
                          0, state.t);
}

void apply_prox(ParamState& state) {
  if (state.regularized)
    soft_threshold_into(state.v, state.prox.effective_lambda(), state.theta);
  else
    state.theta = state.v;
}

}  // namespace

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "sgd") return Algorithm::SGD;
  if (s == "adam") return Algorithm::Adam;
  if (s == "linbreg") return Algorithm::LinBreg;
  if (s == "adabreg") return Algorithm::AdaBreg;
  throw ConfigError("unknown optimizer: " + s);
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::SGD: return "sgd";
    case Algorithm::Adam: return "adam";
    case Algorithm::LinBreg: return "linbreg";
    case Algorithm::AdaBreg: return "adabreg";
  }
  return "?";
}

ParamState init_param_state(std::string name, const Tensor& theta_init,
                            const ProxSpec& prox, bool regularized) {
  ParamState state;
  state.name = std::move(name);
  state.v = theta_init;
  state.m = Tensor(theta_init.shape());
  state.s = Tensor(theta_init.shape());
  state.t = 0;
  state.prox = prox;
  state.regularized = regularized;
  apply_prox(state);
  return state;
}

void sgd_step(ParamState& state, const Tensor& grad, double lr) {
  require_grad_shape(state, grad);
  ++state.t;
  axpy(state.v, -lr, grad);
  check_finite_update(state);
  state.theta = state.v;
}

void linbreg_step(ParamState& state, const Tensor& grad, double lr) {
  require_grad_shape(state, grad);
  ++state.t;
  axpy(state.v, -lr, grad);
  check_finite_update(state);
  apply_prox(state);
}

namespace {

// Shared moment update for Adam and AdaBreg; writes the bias-corrected
// step into v.
void adaptive_v_update(ParamState& state, const Tensor& grad,
                       const OptimConfig& cfg, double lr) {
  require_grad_shape(state, grad);
  ++state.t;
  const double b1 = cfg.beta1, b2 = cfg.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double g = grad[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.s[i] = b2 * state.s[i] + (1.0 - b2) * g * g;
    const double mhat = state.m[i] / c1;
    const double shat = state.s[i] / c2;
    state.v[i] -= lr * mhat / (std::sqrt(shat) + cfg.epsilon);
  }
  check_finite_update(state);
}

}  // namespace

void adam_step(ParamState& state, const Tensor& grad, const OptimConfig& cfg,
               double lr) {
  adaptive_v_update(state, grad, cfg, lr);
  state.theta = state.v;
}

void adabreg_step(ParamState& state, const Tensor& grad,
                  const OptimConfig& cfg, double lr) {
  adaptive_v_update(state, grad, cfg, lr);
  apply_prox(state);
}

void optim_step(ParamState& state, const Tensor& grad, const OptimConfig& cfg,
                double lr) {
  switch (cfg.algorithm) {
    case Algorithm::SGD: sgd_step(state, grad, lr); break;
    case Algorithm::Adam: adam_step(state, grad, cfg, lr); break;
    case Algorithm::LinBreg: linbreg_step(state, grad, lr); break;
    case Algorithm::AdaBreg: adabreg_step(state, grad, cfg, lr); break;
  }
}

LrSchedule LrSchedule::one_cycle(double max_lr, std::uint64_t total_steps,
                                 double pct_start, double div_factor,
                                 double final_div_factor) {
  if (!(pct_start > 0.0 && pct_start < 1.0))
    throw ConfigError("one_cycle: pct_start must be in (0,1)");
  if (!(div_factor > 1.0 && final_div_factor > 1.0))
    throw ConfigError("one_cycle: div factors must be > 1");
  LrSchedule s;
  s.kind = ScheduleKind::OneCycle;
  s.max_lr = max_lr;
  s.total_steps = total_steps;
  s.pct_start = pct_start;
  s.div_factor = div_factor;
  s.final_div_factor = final_div_factor;
  return s;
}

double lr_at(const LrSchedule& schedule, std::uint64_t step) {
  if (schedule.kind == ScheduleKind::Constant) return schedule.max_lr;
  const double total = static_cast<double>(schedule.total_steps);
  const double up_end = schedule.pct_start * total;
  const double lo = schedule.max_lr / schedule.div_factor;
  const double fin = schedule.max_lr / schedule.final_div_factor;
  const double s = static_cast<double>(step);
  if (s >= total) return fin;
  if (s <= up_end) {
    const double frac = up_end == 0.0 ? 1.0 : s / up_end;
    return lo + (schedule.max_lr - lo) * 0.5 * (1.0 - std::cos(kPi * frac));
  }
  const double frac = (s - up_end) / (total - up_end);
  return fin + (schedule.max_lr - fin) * 0.5 * (1.0 + std::cos(kPi * frac));
}

}  // namespace bregsnn
