#include "rainfall/empirical.hpp"

#include <algorithm>
#include <cmath>

#include "rainfall/errors.hpp"

namespace rainfall::empirical {

SortedSample::SortedSample(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw DataError("SortedSample: empty sample");
  for (double v : values_) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("SortedSample: values must be positive and finite");
  }
  std::sort(values_.begin(), values_.end());
}

double type7_quantile(std::span<const double> ascending, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("type7_quantile: p must lie in [0, 1]");
  if (ascending.empty()) throw DataError("type7_quantile: empty sample");
  const std::size_t n = ascending.size();
  if (n == 1) return ascending[0];
  const double h = static_cast<double>(n - 1) * p;  // zero-based rank
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return ascending[n - 1];
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return ascending[lo];
  return ascending[lo] + frac * (ascending[lo + 1] - ascending[lo]);
}

double empirical_quantile(const SortedSample& sample, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("empirical_quantile: p must lie in (0, 1)");
  if (sample.size() < 2) throw DataError("empirical_quantile: need at least two observations");
  return type7_quantile(sample.values(), p);
}

double empirical_pwm(const SortedSample& sample, int j) {
  if (j < 0 || j > 2) throw DomainError("empirical_pwm: order must be 0, 1 or 2");
  const std::size_t n = sample.size();
  if (n <= static_cast<std::size_t>(j)) throw DataError("empirical_pwm: sample too small for this order");
  const auto x = sample.values();
  const double nm1 = static_cast<double>(n) - 1.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = static_cast<double>(i);  // i − 1 in one-based ranks
    double weight = 1.0;
    if (j == 1) weight = r / nm1;
    if (j == 2) weight = r * (r - 1.0) / (nm1 * (nm1 - 1.0));
    sum += weight * x[i];
  }
  return sum / static_cast<double>(n);
}

}  // namespace rainfall::empirical
