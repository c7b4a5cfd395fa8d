#pragma once

#include <cstddef>
#include <vector>

namespace medshift {

/// Gauss-Legendre nodes and weights on [-1, 1].
class GaussLegendreRule {
 public:
  explicit GaussLegendreRule(std::size_t order);

  std::size_t order() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Integral of f over [lo, hi].
  template <class F>
  double integrate(F&& f, double lo, double hi) const {
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      sum += weights_[i] * f(mid + half * nodes_[i]);
    }
    return half * sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace medshift
