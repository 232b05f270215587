#pragma once

#include <string>
#include <vector>

#include "bregsnn/rng.hpp"
#include "bregsnn/tensor.hpp"

namespace bregsnn {

struct LIFParams {
  double beta = 0.9;          // membrane decay per timestep, in (0,1)
  double u_th = 1.0;          // firing threshold
  double surrogate_slope = 10.0;
};

// Pseudo-derivative of the spike step at x = u - u_th: 1 / (1 + k|x|)^2.
double surrogate_grad(double x, double k);
Tensor surrogate_grad(const Tensor& x, double k);

// One LIF update: u' = beta*u + I; s = H(u' - u_th); u_out = u' - u_th*s.
// Integrate, threshold, then subtract-reset.
void lif_step(const Tensor& u, const Tensor& input_current, const LIFParams& p,
              Tensor& u_next, Tensor& spikes);

enum class LayerKind { FeedforwardLIF, RecurrentLIF, LinearReadout };

struct LayerSpec {
  LayerKind kind = LayerKind::FeedforwardLIF;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  LIFParams lif;
};

struct NetworkSpec {
  std::vector<LayerSpec> layers;

  void validate() const;
  std::size_t input_dim() const { return layers.front().in_dim; }
  std::size_t output_dim() const { return layers.back().out_dim; }

  // "40 64 64r 10" -> ff 64, recurrent 64, linear readout 10.
  // A trailing 's' (e.g. "140 256 256r 20s") makes the last layer a
  // feedforward LIF whose mean spike count is the readout.
  static NetworkSpec parse(const std::string& text, const LIFParams& lif = {});
  std::string to_string() const;
};

struct LayerParams {
  Tensor W;  // [out x in]
  Tensor R;  // [out x out], recurrent layers only (otherwise empty)
  Tensor b;  // [out]
};

// Per-timestep caches from a forward pass, consumed by backward.
struct NetworkState {
  std::size_t T = 0;
  Tensor sample;                       // [T x C]
  std::vector<Tensor> pre_reset;       // per LIF layer: [T x out]
  std::vector<Tensor> activations;     // per layer: [T x out] spikes/outputs
  std::vector<Tensor> dropout;         // per hidden layer: [T x out] scales
  bool soft_mode = false;
};

using Gradients = std::vector<LayerParams>;

class Network {
 public:
  Network() = default;

  // Weights uniform in [-sqrt(1/fan_in), +sqrt(1/fan_in)], biases zero,
  // recurrent kernels with fan_in = out_dim.
  static Network build(const NetworkSpec& spec, Rng& rng);

  const NetworkSpec& spec() const { return spec_; }
  std::vector<LayerParams>& params() { return params_; }
  const std::vector<LayerParams>& params() const { return params_; }

  // Replaces spikes with sigmoid(k*(u - u_th)) and disables the reset, so
  // the whole forward pass is differentiable and finite-difference
  // checkable. Test machinery, not a training mode.
  void set_soft_mode(bool on) { soft_mode_ = on; }
  bool soft_mode() const { return soft_mode_; }

  // Drops hidden-layer spikes with probability prob during stateful forward
  // passes, scaling survivors by 1/(1-prob). The membrane reset still sees
  // the raw spike; only the signal sent downstream (and into the recurrent
  // kernel) is masked. Stateless forwards, e.g. evaluation, are unaffected.
  void set_spike_dropout(double prob, Rng* rng) {
    drop_prob_ = prob;
    drop_rng_ = rng;
  }

  // sample is [T x C]; returns logits [output_dim]. state, when given, is
  // filled for a subsequent backward().
  Tensor forward(const Tensor& sample, NetworkState* state = nullptr) const;

  Gradients backward(const NetworkState& state, const Tensor& dlogits) const;

  Gradients zero_gradients() const;

  std::size_t num_parameters() const;

 private:
  NetworkSpec spec_;
  std::vector<LayerParams> params_;
  bool soft_mode_ = false;
  double drop_prob_ = 0.0;
  Rng* drop_rng_ = nullptr;
};

}  // namespace bregsnn
