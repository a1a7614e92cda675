#pragma once

#include <array>
#include <concepts>
#include <cstddef>

#include "rainfall/errors.hpp"

namespace rainfall::numerics {

inline constexpr std::size_t kGaussOrder = 32;

struct GaussRule {
  std::array<double, kGaussOrder> nodes;    // on (−1, 1), ascending
  std::array<double, kGaussOrder> weights;
};

/// Order-32 Gauss-Legendre nodes and weights, computed once by Newton
/// iteration on P_32.
const GaussRule& gauss_legendre_rule();

/// Composite Gauss-Legendre quadrature of f over [lo, hi] split into
/// `panels` equal panels. Nodes are interior, so integrable endpoint
/// singularities are never evaluated directly.
template <std::invocable<double> F>
double gauss_legendre_integrate(F&& f, double lo, double hi, std::size_t panels) {
  if (panels == 0) throw DomainError("gauss_legendre_integrate: panels must be >= 1");
  const GaussRule& rule = gauss_legendre_rule();
  const double width = (hi - lo) / static_cast<double>(panels);
  const double half = 0.5 * width;
  double total = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = lo + (static_cast<double>(k) + 0.5) * width;
    double panel = 0.0;
    for (std::size_t i = 0; i < kGaussOrder; ++i) {
      panel += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    total += panel * half;
  }
  return total;
}

}  // namespace rainfall::numerics
