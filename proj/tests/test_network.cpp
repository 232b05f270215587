#include <cmath>

#include "bregsnn/errors.hpp"
#include "bregsnn/network.hpp"
#include "doctest.h"

using namespace bregsnn;

TEST_CASE("surrogate_grad examples") {
  CHECK(surrogate_grad(0.0, 10.0) == 1.0);
  CHECK(surrogate_grad(0.1, 10.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(surrogate_grad(-0.1, 10.0) == surrogate_grad(0.1, 10.0));
  CHECK(surrogate_grad(100.0, 10.0) < 1e-5);

  const Tensor r = surrogate_grad(Tensor::vec({0.0, 0.3}), 10.0);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK_THROWS_AS(surrogate_grad(Tensor::vec({0.0}), 0.0), ShapeError);
}

TEST_CASE("lif_step fire and subtract reset") {
  LIFParams p;  // beta 0.9, u_th 1.0
  Tensor u = Tensor::vec({0.0, 0.0});
  Tensor un, s;
  lif_step(u, Tensor::vec({1.5, 0.4}), p, un, s);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(un[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(un[1] == doctest::Approx(0.4).epsilon(1e-15));

  CHECK_THROWS_AS(lif_step(u, Tensor::vec({1.0}), p, un, s), ShapeError);
}

TEST_CASE("lif membrane decays geometrically with no input") {
  LIFParams p;
  Tensor u = Tensor::vec({0.5});
  Tensor un, s;
  const Tensor zero = Tensor::vec({0.0});
  for (int i = 0; i < 10; ++i) {
    lif_step(u, zero, p, un, s);
    CHECK(s[0] == 0.0);
    u = un;
  }
  CHECK(u[0] == doctest::Approx(0.5 * std::pow(0.9, 10)).epsilon(1e-12));
}

TEST_CASE("lif exact threshold fires") {
  LIFParams p;
  Tensor u = Tensor::vec({0.0});
  Tensor un, s;
  lif_step(u, Tensor::vec({1.0}), p, un, s);
  CHECK(s[0] == 1.0);
  CHECK(un[0] == 0.0);
}

TEST_CASE("spec parse and round trip") {
  const NetworkSpec s = NetworkSpec::parse("40 64 64r 10");
  REQUIRE(s.layers.size() == 3);
  CHECK(s.layers[0].kind == LayerKind::FeedforwardLIF);
  CHECK(s.layers[0].in_dim == 40);
  CHECK(s.layers[0].out_dim == 64);
  CHECK(s.layers[1].kind == LayerKind::RecurrentLIF);
  CHECK(s.layers[2].kind == LayerKind::LinearReadout);
  CHECK(s.input_dim() == 40);
  CHECK(s.output_dim() == 10);
  CHECK(s.to_string() == "40 64 64r 10");

  const NetworkSpec sr = NetworkSpec::parse("140 256 256r 20s");
  CHECK(sr.layers.back().kind == LayerKind::FeedforwardLIF);
  CHECK(sr.to_string() == "140 256 256r 20s");

  CHECK_THROWS_AS(NetworkSpec::parse("40"), ConfigError);
  CHECK_THROWS_AS(NetworkSpec::parse("40 x 10"), ConfigError);
  CHECK_THROWS_AS(NetworkSpec::parse("0 10"), ConfigError);
}

TEST_CASE("validate rejects broken chains and misplaced readouts") {
  NetworkSpec s = NetworkSpec::parse("4 8 2");
  s.layers[1].in_dim = 9;
  CHECK_THROWS_AS(s.validate(), ConfigError);

  NetworkSpec r = NetworkSpec::parse("4 8 2");
  r.layers[0].kind = LayerKind::LinearReadout;
  CHECK_THROWS_AS(r.validate(), ConfigError);

  NetworkSpec b = NetworkSpec::parse("4 8 2");
  b.layers[0].lif.beta = 1.5;
  CHECK_THROWS_AS(b.validate(), ConfigError);
}

TEST_CASE("build shapes and init bounds") {
  Rng rng(4);
  const Network net = Network::build(NetworkSpec::parse("40 64 64r 10"), rng);
  const auto& p = net.params();
  REQUIRE(p.size() == 3);
  CHECK(p[0].W.rows() == 64);
  CHECK(p[0].W.cols() == 40);
  CHECK(p[0].R.size() == 0);
  CHECK(p[1].R.rows() == 64);
  CHECK(p[1].R.cols() == 64);
  CHECK(p[2].W.rows() == 10);
  CHECK(p[2].W.cols() == 64);
  CHECK(net.num_parameters() ==
        64 * 40 + 64 + 64 * 64 + 64 * 64 + 64 + 10 * 64 + 10);

  const double b0 = std::sqrt(1.0 / 40.0);
  for (std::size_t i = 0; i < p[0].W.size(); ++i) {
    CHECK(std::fabs(p[0].W[i]) <= b0);
  }
  for (std::size_t i = 0; i < p[0].b.size(); ++i) CHECK(p[0].b[i] == 0.0);
}

TEST_CASE("forward rejects bad samples") {
  Rng rng(1);
  const Network net = Network::build(NetworkSpec::parse("4 6 2"), rng);
  CHECK_THROWS_AS(net.forward(Tensor({5})), ShapeError);
  CHECK_THROWS_AS(net.forward(Tensor({3, 5})), ShapeError);
}

TEST_CASE("zero input yields zero logits") {
  // Biases start at zero, so no LIF ever crosses threshold and the linear
  // readout sees all-zero spikes.
  Rng rng(2);
  const Network net = Network::build(NetworkSpec::parse("4 6 6r 2"), rng);
  const Tensor logits = net.forward(Tensor({7, 4}));
  CHECK(logits[0] == 0.0);
  CHECK(logits[1] == 0.0);
}

TEST_CASE("single linear layer at T=1 is an affine map") {
  Rng rng(3);
  const Network net = Network::build(NetworkSpec::parse("3 2"), rng);
  const auto& p = net.params()[0];
  Tensor x({1, 3});
  x[0] = 0.4;
  x[1] = -1.0;
  x[2] = 2.0;
  const Tensor logits = net.forward(x);
  for (std::size_t i = 0; i < 2; ++i) {
    double want = p.b[i];
    for (std::size_t j = 0; j < 3; ++j) want += p.W(i, j) * x[j];
    CHECK(logits[i] == doctest::Approx(want).epsilon(1e-15));
  }
}

TEST_CASE("recurrent layer with zero kernel matches feedforward") {
  Rng rng(5);
  Network rec = Network::build(NetworkSpec::parse("6 8r 3"), rng);
  Network ff = Network::build(NetworkSpec::parse("6 8 3"), rng);
  ff.params()[0].W = rec.params()[0].W;
  ff.params()[0].b = rec.params()[0].b;
  ff.params()[1] = rec.params()[1];
  for (std::size_t i = 0; i < rec.params()[0].R.size(); ++i)
    rec.params()[0].R[i] = 0.0;

  Rng data(6);
  const Tensor x = data.rand_uniform({10, 6}, 0.0, 3.0);
  const Tensor a = rec.forward(x);
  const Tensor b = ff.forward(x);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("forward is deterministic") {
  Rng r1(11), r2(11);
  const Network n1 = Network::build(NetworkSpec::parse("5 7r 4"), r1);
  const Network n2 = Network::build(NetworkSpec::parse("5 7r 4"), r2);
  Rng data(12);
  const Tensor x = data.rand_uniform({8, 5}, 0.0, 2.0);
  const Tensor a = n1.forward(x);
  const Tensor b = n2.forward(x);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("backward with zero dlogits gives zero gradients") {
  Rng rng(13);
  const Network net = Network::build(NetworkSpec::parse("5 6r 3"), rng);
  Rng data(14);
  const Tensor x = data.rand_uniform({6, 5}, 0.0, 3.0);
  NetworkState st;
  net.forward(x, &st);
  const Gradients g = net.backward(st, Tensor({3}));
  for (const auto& lg : g) {
    for (std::size_t i = 0; i < lg.W.size(); ++i) CHECK(lg.W[i] == 0.0);
    for (std::size_t i = 0; i < lg.R.size(); ++i) CHECK(lg.R[i] == 0.0);
    for (std::size_t i = 0; i < lg.b.size(); ++i) CHECK(lg.b[i] == 0.0);
  }
}

TEST_CASE("readout gradient at T=1 is an outer product") {
  Rng rng(15);
  const Network net = Network::build(NetworkSpec::parse("3 2"), rng);
  Tensor x({1, 3});
  x[0] = 1.0;
  x[1] = -2.0;
  x[2] = 0.5;
  NetworkState st;
  net.forward(x, &st);
  const Tensor dl = Tensor::vec({0.7, -0.3});
  const Gradients g = net.backward(st, dl);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(g[0].b[i] == doctest::Approx(dl[i]).epsilon(1e-15));
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(g[0].W(i, j) == doctest::Approx(dl[i] * x[j]).epsilon(1e-15));
  }
}

TEST_CASE("backward rejects mismatched state") {
  Rng rng(16);
  const Network net = Network::build(NetworkSpec::parse("3 4 2"), rng);
  NetworkState st;
  CHECK_THROWS_AS(net.backward(st, Tensor({2})), ShapeError);
}

namespace {

// Central-difference check of d(sum c_i logits_i)/d(param) in soft mode.
void check_soft_gradients(const std::string& spec_text) {
  Rng rng(23);
  Network net = Network::build(NetworkSpec::parse(spec_text), rng);
  net.set_soft_mode(true);
  Rng data(24);
  const Tensor x = data.rand_uniform({4, net.spec().input_dim()}, 0.0, 2.0);
  const Tensor c = data.rand_uniform({net.spec().output_dim()}, -1.0, 1.0);

  NetworkState st;
  net.forward(x, &st);
  const Gradients g = net.backward(st, c);

  auto loss = [&]() {
    const Tensor logits = net.forward(x);
    return dot(logits, c);
  };
  const double h = 1e-6;
  auto check_one = [&](Tensor& param, const Tensor& grad, std::size_t i) {
    const double keep = param[i];
    param[i] = keep + h;
    const double lp = loss();
    param[i] = keep - h;
    const double lm = loss();
    param[i] = keep;
    const double fd = (lp - lm) / (2.0 * h);
    CHECK(std::fabs(fd - grad[i]) < 1e-4 * std::max(1.0, std::fabs(fd)));
  };
  for (std::size_t l = 0; l < net.params().size(); ++l) {
    auto& p = net.params()[l];
    for (std::size_t i = 0; i < p.W.size(); i += 1 + p.W.size() / 8)
      check_one(p.W, g[l].W, i);
    for (std::size_t i = 0; i < p.R.size(); i += 1 + p.R.size() / 8)
      check_one(p.R, g[l].R, i);
    for (std::size_t i = 0; i < p.b.size(); i += 1 + p.b.size() / 4)
      check_one(p.b, g[l].b, i);
  }
}

}  // namespace

TEST_CASE("soft-mode gradients match finite differences, feedforward") {
  check_soft_gradients("4 5 3");
}

TEST_CASE("soft-mode gradients match finite differences, recurrent") {
  check_soft_gradients("4 5r 3");
}

TEST_CASE("soft-mode gradients match finite differences, spike readout") {
  check_soft_gradients("4 5 3s");
}
