#include "bregsnn/prox.hpp"

#include <cmath>
#include <sstream>

namespace bregsnn {

double soft_threshold(double v, double lambda) {
  const double mag = std::fabs(v) - lambda;
  if (mag <= 0.0) return 0.0;
  return v < 0.0 ? -mag : mag;
}

void soft_threshold_into(const Tensor& v, double lambda, Tensor& out) {
  if (lambda < 0.0) throw ShapeError("soft_threshold: lambda must be >= 0");
  if (!out.same_shape(v)) out = Tensor(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i)
    out[i] = soft_threshold(v[i], lambda);
}

Tensor soft_threshold(const Tensor& v, double lambda) {
  Tensor out(v.shape());
  soft_threshold_into(v, lambda, out);
  return out;
}

Tensor subgradient_l1(const Tensor& y, double lambda) {
  if (lambda < 0.0) throw ShapeError("subgradient_l1: lambda must be >= 0");
  Tensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > 0.0)
      g[i] = lambda;
    else if (y[i] < 0.0)
      g[i] = -lambda;
    else
      g[i] = 0.0;
  }
  return g;
}

double bregman_distance(const ProxSpec& spec, const Tensor& x,
                        const Tensor& y) {
  if (!x.same_shape(y))
    throw ShapeError("bregman_distance: shapes differ");
  const double lambda = spec.effective_lambda();
  double jx = 0.0, jy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    jx += lambda * std::fabs(x[i]);
    jy += lambda * std::fabs(y[i]);
  }
  const Tensor g = subgradient_l1(y, lambda);
  return jx - jy - dot(g, sub(x, y));
}

SparsityReport sparsity_report(const std::vector<NamedTensor>& groups) {
  SparsityReport report;
  for (const auto& g : groups) {
    SparsityReport::Group row;
    row.name = g.name;
    row.total = g.tensor->size();
    for (std::size_t i = 0; i < g.tensor->size(); ++i)
      if ((*g.tensor)[i] != 0.0) ++row.nonzero;
    report.total += row.total;
    report.nonzero += row.nonzero;
    report.groups.push_back(std::move(row));
  }
  return report;
}

std::string SparsityReport::to_csv() const {
  std::ostringstream os;
  os << "group,total,nonzero\n";
  for (const auto& g : groups)
    os << g.name << ',' << g.total << ',' << g.nonzero << '\n';
  os << "TOTAL," << total << ',' << nonzero << '\n';
  return os.str();
}

}  // namespace bregsnn
