#include <cmath>
#include <sstream>

#include "bregsnn/prox.hpp"
#include "bregsnn/rng.hpp"
#include "doctest.h"

using namespace bregsnn;

TEST_CASE("soft_threshold formula cases") {
  CHECK(soft_threshold(1.5, 0.5) == 1.0);
  CHECK(soft_threshold(-0.3, 0.5) == 0.0);
  CHECK(std::signbit(soft_threshold(-0.3, 0.5)) == false);  // +0.0 exactly
  CHECK(soft_threshold(-1.5, 0.5) == -1.0);
  CHECK(soft_threshold(0.5, 0.5) == 0.0);  // boundary lands on exact zero

  const Tensor v = Tensor::vec({1.5, -0.3, 0.0, 2.0});
  const Tensor r = soft_threshold(v, 0.5);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == 0.0);
  CHECK(r[3] == 1.5);
}

TEST_CASE("soft_threshold lambda=0 is the identity") {
  Rng rng(2);
  const Tensor v = rng.rand_uniform({100}, -5.0, 5.0);
  const Tensor r = soft_threshold(v, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(r[i] == v[i]);
}

TEST_CASE("soft_threshold rejects negative lambda") {
  CHECK_THROWS_AS(soft_threshold(Tensor::vec({1.0}), -0.1), ShapeError);
}

TEST_CASE("soft_threshold_into matches") {
  const Tensor v = Tensor::vec({2.0, -0.1});
  Tensor out(v.shape());
  soft_threshold_into(v, 0.5, out);
  CHECK(out[0] == 1.5);
  CHECK(out[1] == 0.0);
}

TEST_CASE("prox property suite: non-expansive, shrinkage, sign, exact zero") {
  Rng rng(77);
  for (int i = 0; i < 100000; ++i) {
    const double a = rng.uniform(-10.0, 10.0);
    const double b = rng.uniform(-10.0, 10.0);
    const double lam = rng.uniform(0.0, 5.0) + 1e-12;
    const double pa = soft_threshold(a, lam);
    const double pb = soft_threshold(b, lam);
    // 1 ulp slack: pa and pb are rounded separately
    CHECK(std::fabs(pa - pb) <= std::fabs(a - b) * (1.0 + 1e-12));
    CHECK(std::fabs(pa) <= std::fabs(a));
    if (pa != 0.0) CHECK(pa * a > 0.0);
    if (std::fabs(a) <= lam) CHECK(pa == 0.0);
    // fixed point under a second lambda=0 pass
    CHECK(soft_threshold(pa, 0.0) == pa);
  }
}

TEST_CASE("subgradient_l1") {
  const Tensor r = subgradient_l1(Tensor::vec({2, -3}), 1.0);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == -1.0);
  CHECK(subgradient_l1(Tensor::vec({0}), 5.0)[0] == 0.0);
  CHECK(subgradient_l1(Tensor::vec({0.1}), 2.0)[0] == 2.0);
}

TEST_CASE("bregman_distance formula cases") {
  const ProxSpec l1 = ProxSpec::l1(1.0);
  CHECK(bregman_distance(l1, Tensor::vec({2}), Tensor::vec({1})) == 0.0);
  CHECK(bregman_distance(l1, Tensor::vec({-1}), Tensor::vec({1})) == 2.0);

  Rng rng(8);
  const Tensor x = rng.rand_uniform({6}, -2.0, 2.0);
  CHECK(bregman_distance(l1, x, x) == 0.0);
  CHECK_THROWS_AS(bregman_distance(l1, x, Tensor::vec({1.0})), ShapeError);
}

TEST_CASE("bregman_distance is non-negative") {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const ProxSpec l1 = ProxSpec::l1(rng.uniform(0.0, 3.0));
    const Tensor x = rng.rand_uniform({5}, -4.0, 4.0);
    const Tensor y = rng.rand_uniform({5}, -4.0, 4.0);
    CHECK(bregman_distance(l1, x, y) >= -1e-12);  // rounding slack
  }
}

TEST_CASE("bregman_distance zero for same-sign same-support pairs") {
  const ProxSpec l1 = ProxSpec::l1(2.0);
  const Tensor x = Tensor::vec({3.0, -1.0, 0.0});
  const Tensor y = Tensor::vec({0.5, -4.0, 0.0});
  CHECK(bregman_distance(l1, x, y) == 0.0);
}

TEST_CASE("sparsity_report counts") {
  const Tensor a = Tensor::vec({0, 0.1, -0.2, 0});
  const Tensor z({3});
  const SparsityReport r = sparsity_report({{"a", &a}, {"z", &z}});
  CHECK(r.groups.size() == 2);
  CHECK(r.groups[0].total == 4);
  CHECK(r.groups[0].nonzero == 2);
  CHECK(r.groups[1].nonzero == 0);
  CHECK(r.total == 7);
  CHECK(r.nonzero == 2);
  CHECK(r.nonzero_fraction() == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("post-threshold nonzero count equals brute-force strict count") {
  Rng rng(13);
  const Tensor v = rng.rand_uniform({5000}, -1.0, 1.0);
  const double lam = 0.3;
  const Tensor t = soft_threshold(v, lam);
  std::size_t expect = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::fabs(v[i]) > lam) ++expect;
  const SparsityReport r = sparsity_report({{"t", &t}});
  CHECK(r.nonzero == expect);
}

TEST_CASE("sparsity csv format") {
  const Tensor a = Tensor::vec({1.0, 0.0});
  const std::string csv = sparsity_report({{"w", &a}}).to_csv();
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "group,total,nonzero");
  std::getline(is, line);
  CHECK(line == "w,2,1");
  std::getline(is, line);
  CHECK(line == "TOTAL,2,1");
}
