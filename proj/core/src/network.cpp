#include "bregsnn/network.hpp"

#include <cmath>
#include <sstream>

#include "bregsnn/errors.hpp"

namespace bregsnn {

double surrogate_grad(double x, double k) {
  const double d = 1.0 + k * std::fabs(x);
  return 1.0 / (d * d);
}

Tensor surrogate_grad(const Tensor& x, double k) {
  if (!(k > 0.0)) throw ShapeError("surrogate_grad: k must be > 0");
  return map(x, [k](double v) { return surrogate_grad(v, k); });
}

void lif_step(const Tensor& u, const Tensor& input_current, const LIFParams& p,
              Tensor& u_next, Tensor& spikes) {
  if (!u.same_shape(input_current))
    throw ShapeError("lif_step: shapes differ");
  if (!u_next.same_shape(u)) u_next = Tensor(u.shape());
  if (!spikes.same_shape(u)) spikes = Tensor(u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double integrated = p.beta * u[i] + input_current[i];
    const double s = integrated >= p.u_th ? 1.0 : 0.0;
    spikes[i] = s;
    u_next[i] = integrated - p.u_th * s;
  }
}

void NetworkSpec::validate() const {
  if (layers.empty()) throw ConfigError("network: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& spec = layers[l];
    if (spec.in_dim == 0 || spec.out_dim == 0)
      throw ConfigError("network: zero layer dimension");
    if (l > 0 && layers[l - 1].out_dim != spec.in_dim)
      throw ConfigError("network: layer dimensions do not chain");
    if (spec.kind == LayerKind::LinearReadout && l + 1 != layers.size())
      throw ConfigError("network: linear readout must be the final layer");
    if (spec.kind != LayerKind::LinearReadout) {
      if (!(spec.lif.beta > 0.0 && spec.lif.beta < 1.0) &&
          !(spec.lif.beta == 1.0))
        throw ConfigError("network: lif beta must be in (0,1]");
      if (!(spec.lif.u_th > 0.0) || !(spec.lif.surrogate_slope > 0.0))
        throw ConfigError("network: invalid lif parameters");
    }
  }
}

NetworkSpec NetworkSpec::parse(const std::string& text, const LIFParams& lif) {
  std::istringstream is(text);
  std::vector<std::string> tokens;
  for (std::string tok; is >> tok;) tokens.push_back(tok);
  if (tokens.size() < 2)
    throw ConfigError("network spec needs at least input and output: " + text);

  NetworkSpec spec;
  std::size_t prev_dim = 0;
  try {
    prev_dim = std::stoul(tokens[0]);
  } catch (const std::exception&) {
    throw ConfigError("network spec: bad input dim: " + tokens[0]);
  }
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    std::string tok = tokens[i];
    const bool last = i + 1 == tokens.size();
    bool spike_readout = false, recurrent = false;
    if (last && tok.ends_with('s')) {
      spike_readout = true;
      tok.pop_back();
    }
    if (tok.ends_with('r')) {
      recurrent = true;
      tok.pop_back();
    }
    std::size_t dim = 0;
    try {
      dim = std::stoul(tok);
    } catch (const std::exception&) {
      throw ConfigError("network spec: bad layer token: " + tokens[i]);
    }
    LayerSpec layer;
    layer.in_dim = prev_dim;
    layer.out_dim = dim;
    layer.lif = lif;
    if (last && !spike_readout)
      layer.kind = LayerKind::LinearReadout;
    else
      layer.kind = recurrent ? LayerKind::RecurrentLIF
                             : LayerKind::FeedforwardLIF;
    spec.layers.push_back(layer);
    prev_dim = dim;
  }
  spec.validate();
  return spec;
}

std::string NetworkSpec::to_string() const {
  std::ostringstream os;
  os << layers.front().in_dim;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& spec = layers[l];
    os << ' ' << spec.out_dim;
    if (spec.kind == LayerKind::RecurrentLIF) os << 'r';
    if (l + 1 == layers.size() && spec.kind != LayerKind::LinearReadout)
      os << 's';
  }
  return os.str();
}

Network Network::build(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  Network net;
  net.spec_ = spec;
  for (const auto& layer : spec.layers) {
    LayerParams p;
    const double bound = std::sqrt(1.0 / static_cast<double>(layer.in_dim));
    p.W = rng.rand_uniform({layer.out_dim, layer.in_dim}, -bound, bound);
    p.b = Tensor({layer.out_dim});
    if (layer.kind == LayerKind::RecurrentLIF) {
      const double rb = std::sqrt(1.0 / static_cast<double>(layer.out_dim));
      p.R = rng.rand_uniform({layer.out_dim, layer.out_dim}, -rb, rb);
    }
    net.params_.push_back(std::move(p));
  }
  return net;
}

std::size_t Network::num_parameters() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.W.size() + p.R.size() + p.b.size();
  return n;
}

Gradients Network::zero_gradients() const {
  Gradients g;
  for (const auto& p : params_) {
    LayerParams z;
    z.W = Tensor(p.W.shape());
    z.b = Tensor(p.b.shape());
    if (p.R.size() > 0) z.R = Tensor(p.R.shape());
    g.push_back(std::move(z));
  }
  return g;
}

namespace {

inline double soft_spike(double x, double k) {
  return 1.0 / (1.0 + std::exp(-k * x));
}

// y = W x + b, raw pointers, y overwritten
inline void affine(const Tensor& W, const double* x, const Tensor& b,
                   double* y) {
  const std::size_t m = W.rows(), n = W.cols();
  const double* wd = W.data().data();
  const double* bd = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = wd + i * n;
    double acc = bd[i];
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

// y += R x
inline void matvec_acc(const Tensor& R, const double* x, double* y) {
  const std::size_t m = R.rows(), n = R.cols();
  const double* rd = R.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = rd + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] += acc;
  }
}

// G += outer(g, x), G is [m x n]
inline void outer_acc(Tensor& G, const double* g, const double* x) {
  const std::size_t m = G.rows(), n = G.cols();
  double* gd = G.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    double* row = gd + i * n;
    for (std::size_t j = 0; j < n; ++j) row[j] += gi * x[j];
  }
}

// y = W^T g
inline void matvec_t(const Tensor& W, const double* g, double* y) {
  const std::size_t m = W.rows(), n = W.cols();
  const double* wd = W.data().data();
  for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double gi = g[i];
    if (gi == 0.0) continue;
    const double* row = wd + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += gi * row[j];
  }
}

}  // namespace

Tensor Network::forward(const Tensor& sample, NetworkState* state) const {
  if (sample.rank() != 2)
    throw ShapeError("forward: sample must be [T x C]");
  if (sample.cols() != spec_.input_dim())
    throw ShapeError("forward: sample channel count does not match network");
  const std::size_t T = sample.rows();
  const std::size_t L = spec_.layers.size();

  // Per-timestep activations are always cached; membrane potentials only
  // when a state is requested.
  std::vector<Tensor> activations(L);
  std::vector<Tensor> pre_reset(L);
  std::vector<Tensor> membrane(L);
  std::vector<Tensor> drop_scale(L);
  const bool dropping = state && drop_prob_ > 0.0 && drop_rng_;
  for (std::size_t l = 0; l < L; ++l) {
    activations[l] = Tensor({T, spec_.layers[l].out_dim});
    if (spec_.layers[l].kind != LayerKind::LinearReadout) {
      membrane[l] = Tensor({spec_.layers[l].out_dim});
      if (state) pre_reset[l] = Tensor({T, spec_.layers[l].out_dim});
    }
    if (dropping && l + 1 < L &&
        spec_.layers[l].kind != LayerKind::LinearReadout)
      drop_scale[l] = Tensor({T, spec_.layers[l].out_dim});
  }

  std::vector<double> current(0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = sample.data().data() + t * sample.cols();
    for (std::size_t l = 0; l < L; ++l) {
      const auto& layer = spec_.layers[l];
      const auto& p = params_[l];
      double* out = activations[l].data().data() + t * layer.out_dim;
      if (layer.kind == LayerKind::LinearReadout) {
        affine(p.W, x, p.b, out);
      } else {
        current.resize(layer.out_dim);
        affine(p.W, x, p.b, current.data());
        if (layer.kind == LayerKind::RecurrentLIF && t > 0)
          matvec_acc(p.R, activations[l].data().data() + (t - 1) * layer.out_dim,
                     current.data());
        double* u = membrane[l].data().data();
        const double beta = layer.lif.beta, u_th = layer.lif.u_th;
        const double k = layer.lif.surrogate_slope;
        double* drop = drop_scale[l].size() > 0
                           ? drop_scale[l].data().data() + t * layer.out_dim
                           : nullptr;
        const double keep_scale = 1.0 / (1.0 - drop_prob_);
        for (std::size_t i = 0; i < layer.out_dim; ++i) {
          const double integrated = beta * u[i] + current[i];
          if (state)
            pre_reset[l][t * layer.out_dim + i] = integrated;
          if (soft_mode_) {
            out[i] = soft_spike(integrated - u_th, k);
            u[i] = integrated;
          } else {
            const double s = integrated >= u_th ? 1.0 : 0.0;
            out[i] = s;
            u[i] = integrated - u_th * s;
          }
          if (drop) {
            const double m =
                drop_rng_->next_double() < drop_prob_ ? 0.0 : keep_scale;
            drop[i] = m;
            out[i] *= m;
          }
        }
      }
      x = out;
    }
  }

  // Readout: time-mean of the last layer's outputs (linear values, or
  // spike counts when the last layer is LIF).
  const std::size_t K = spec_.output_dim();
  Tensor logits({K});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < K; ++i)
      logits[i] += activations[L - 1](t, i);
  for (std::size_t i = 0; i < K; ++i) logits[i] /= static_cast<double>(T);

  if (state) {
    state->T = T;
    state->sample = sample;
    state->activations = std::move(activations);
    state->pre_reset = std::move(pre_reset);
    state->dropout = std::move(drop_scale);
    state->soft_mode = soft_mode_;
  }
  return logits;
}

Gradients Network::backward(const NetworkState& state,
                            const Tensor& dlogits) const {
  const std::size_t L = spec_.layers.size();
  const std::size_t T = state.T;
  if (state.activations.size() != L || T == 0)
    throw ShapeError("backward: state missing or does not match network");
  if (dlogits.size() != spec_.output_dim())
    throw ShapeError("backward: dlogits size mismatch");

  Gradients grads = zero_gradients();

  // Gradient w.r.t. the current layer's per-timestep outputs. Seeded from
  // the time-mean readout.
  Tensor down({T, spec_.output_dim()});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < dlogits.size(); ++i)
      down(t, i) = dlogits[i] / static_cast<double>(T);

  for (std::size_t li = L; li-- > 0;) {
    const auto& layer = spec_.layers[li];
    const auto& p = params_[li];
    auto& g = grads[li];
    const std::size_t out_dim = layer.out_dim;
    const std::size_t in_dim = layer.in_dim;

    const Tensor& below =
        li == 0 ? state.sample : state.activations[li - 1];
    Tensor down_next({T, in_dim});

    if (layer.kind == LayerKind::LinearReadout) {
      for (std::size_t t = 0; t < T; ++t) {
        const double* gy = down.data().data() + t * out_dim;
        const double* x = below.data().data() + t * in_dim;
        outer_acc(g.W, gy, x);
        for (std::size_t i = 0; i < out_dim; ++i) g.b[i] += gy[i];
        matvec_t(p.W, gy, down_next.data().data() + t * in_dim);
      }
    } else {
      if (state.pre_reset[li].size() == 0)
        throw ShapeError("backward: state has no cached membrane potentials");
      const double beta = layer.lif.beta, u_th = layer.lif.u_th;
      const double k = layer.lif.surrogate_slope;
      const bool recurrent = layer.kind == LayerKind::RecurrentLIF;
      std::vector<double> g_uout(out_dim, 0.0);   // grad w.r.t. post-reset u
      std::vector<double> g_srec(out_dim, 0.0);   // carry via recurrent kernel
      std::vector<double> g_up(out_dim);          // grad w.r.t. pre-reset u
      const bool dropped =
          li < state.dropout.size() && state.dropout[li].size() > 0;
      for (std::size_t t = T; t-- > 0;) {
        const double* pre = state.pre_reset[li].data().data() + t * out_dim;
        const double* drop =
            dropped ? state.dropout[li].data().data() + t * out_dim : nullptr;
        const double* ext = down.data().data() + t * out_dim;
        for (std::size_t i = 0; i < out_dim; ++i) {
          // Gradient w.r.t. the (possibly masked) transmitted spike; the
          // mask scale commutes into the raw-spike gradient.
          const double gs = (ext[i] + (recurrent ? g_srec[i] : 0.0)) *
                            (drop ? drop[i] : 1.0);
          if (state.soft_mode) {
            // s = sigmoid(k*(u'-u_th)), no reset
            const double s = soft_spike(pre[i] - u_th, k);
            const double ds = k * s * (1.0 - s);
            g_up[i] = g_uout[i] + gs * ds;
          } else {
            const double sg = surrogate_grad(pre[i] - u_th, k);
            g_up[i] = g_uout[i] * (1.0 - u_th * sg) + gs * sg;
          }
        }
        const double* x = below.data().data() + t * in_dim;
        outer_acc(g.W, g_up.data(), x);
        for (std::size_t i = 0; i < out_dim; ++i) g.b[i] += g_up[i];
        matvec_t(p.W, g_up.data(), down_next.data().data() + t * in_dim);
        if (recurrent) {
          if (t > 0) {
            const double* s_prev =
                state.activations[li].data().data() + (t - 1) * out_dim;
            outer_acc(g.R, g_up.data(), s_prev);
            matvec_t(p.R, g_up.data(), g_srec.data());
          } else {
            std::fill(g_srec.begin(), g_srec.end(), 0.0);
          }
        }
        for (std::size_t i = 0; i < out_dim; ++i)
          g_uout[i] = beta * g_up[i];
      }
    }
    down = std::move(down_next);
  }
  return grads;
}

}  // namespace bregsnn
