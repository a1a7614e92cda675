#include "rainfall/numerics/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace rainfall::numerics {
namespace {

GaussRule build_rule() {
  GaussRule rule{};
  constexpr std::size_t n = kGaussOrder;
  for (std::size_t i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / static_cast<double>(k);
      }
      dp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre_rule() {
  static const GaussRule rule = build_rule();
  return rule;
}

}  // namespace rainfall::numerics
