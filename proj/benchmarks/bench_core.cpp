#include <benchmark/benchmark.h>

#include "bregsnn/network.hpp"
#include "bregsnn/optim.hpp"
#include "bregsnn/prox.hpp"
#include "bregsnn/rng.hpp"
#include "bregsnn/train.hpp"

using namespace bregsnn;

namespace {

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = rng.rand_uniform({n, n}, -1.0, 1.0);
  const Tensor b = rng.rand_uniform({n, n}, -1.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_SoftThreshold(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  const Tensor v = rng.rand_uniform({n}, -1.0, 1.0);
  Tensor out(v.shape());
  for (auto _ : state) {
    soft_threshold_into(v, 0.3, out);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SoftThreshold)->Arg(4096)->Arg(65536);

void BM_Forward(benchmark::State& state) {
  Rng rng(3);
  const Network net = Network::build(NetworkSpec::parse("40 64 64r 10"), rng);
  Rng data(4);
  const Tensor x = data.rand_uniform({50, 40}, 0.0, 4.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(net.forward(x));
  }
}
BENCHMARK(BM_Forward);

void BM_ForwardBackward(benchmark::State& state) {
  Rng rng(5);
  const Network net = Network::build(NetworkSpec::parse("40 64 64r 10"), rng);
  Rng data(6);
  const Tensor x = data.rand_uniform({50, 40}, 0.0, 4.0);
  for (auto _ : state) {
    NetworkState st;
    const Tensor logits = net.forward(x, &st);
    const auto lg = cross_entropy(logits, 3);
    benchmark::DoNotOptimize(net.backward(st, lg.dlogits));
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_AdabregStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  ParamState st = init_param_state("w", rng.rand_uniform({n}, -1.0, 1.0),
                                   ProxSpec::l1(0.3), true);
  const Tensor g = rng.rand_uniform({n}, -1.0, 1.0);
  OptimConfig cfg;
  for (auto _ : state) {
    adabreg_step(st, g, cfg, 1e-3);
    benchmark::DoNotOptimize(st.theta);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_AdabregStep)->Arg(4096)->Arg(65536);

void BM_LinbregStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(8);
  ParamState st = init_param_state("w", rng.rand_uniform({n}, -1.0, 1.0),
                                   ProxSpec::l1(0.3), true);
  const Tensor g = rng.rand_uniform({n}, -1.0, 1.0);
  for (auto _ : state) {
    linbreg_step(st, g, 1e-3);
    benchmark::DoNotOptimize(st.theta);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_LinbregStep)->Arg(4096)->Arg(65536);

}  // namespace

BENCHMARK_MAIN();
