#pragma once

#include <string>
#include <vector>

#include "bregsnn/tensor.hpp"

namespace bregsnn {

enum class ProxKind { None, L1 };

// Convex regularizer J(theta) = lambda * ||theta||_1 (or none).
struct ProxSpec {
  ProxKind kind = ProxKind::None;
  double lambda = 0.0;

  static ProxSpec none() { return {ProxKind::None, 0.0}; }
  static ProxSpec l1(double lambda) { return {ProxKind::L1, lambda}; }

  double effective_lambda() const {
    return kind == ProxKind::L1 ? lambda : 0.0;
  }
};

// sign(v_i) * max(0, |v_i| - lambda); entries with |v_i| <= lambda become
// literal 0.0 so sparsity counting is exact equality.
Tensor soft_threshold(const Tensor& v, double lambda);
double soft_threshold(double v, double lambda);
void soft_threshold_into(const Tensor& v, double lambda, Tensor& out);

// lambda * sign(y_i), with the selection 0 at y_i = 0 (the minimal-norm
// element of the sub-differential).
Tensor subgradient_l1(const Tensor& y, double lambda);

// D_J(x, y) = J(x) - J(y) - <dJ(y), x - y>, diagnostic only.
double bregman_distance(const ProxSpec& spec, const Tensor& x, const Tensor& y);

struct SparsityReport {
  struct Group {
    std::string name;
    std::size_t total = 0;
    std::size_t nonzero = 0;
  };
  std::vector<Group> groups;
  std::size_t total = 0;
  std::size_t nonzero = 0;

  double nonzero_fraction() const {
    return total == 0 ? 0.0 : static_cast<double>(nonzero) / total;
  }

  // One `group,total,nonzero` row per group plus a TOTAL row.
  std::string to_csv() const;
};

struct NamedTensor {
  std::string name;
  const Tensor* tensor;
};

SparsityReport sparsity_report(const std::vector<NamedTensor>& groups);

}  // namespace bregsnn
