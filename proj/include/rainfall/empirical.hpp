#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rainfall::empirical {

/// Ascending sample of positive values (mm).
class SortedSample {
 public:
  /// Sorts `values`; throws DataError if empty or any value is not a
  /// positive finite number.
  explicit SortedSample(std::vector<double> values);
  static SortedSample from(std::span<const double> values) {
    return SortedSample(std::vector<double>(values.begin(), values.end()));
  }

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }

 private:
  std::vector<double> values_;
};

/// Type-7 quantile: linear interpolation of order statistics at rank
/// h = (n − 1)p + 1. Requires 0 < p < 1 and n >= 2.
double empirical_quantile(const SortedSample& sample, double p);

/// Type-7 quantile on an arbitrary ascending span (may contain any finite
/// values, n >= 1). Used for D-value aggregation where signs are mixed.
double type7_quantile(std::span<const double> ascending, double p);

/// Unbiased PWM estimator ν̂_j = (1/n) Σ_i [C(i−1, j) / C(n−1, j)] x_(i).
/// Requires j ∈ {0, 1, 2} and n > j.
double empirical_pwm(const SortedSample& sample, int j);

}  // namespace rainfall::empirical
