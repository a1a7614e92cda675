#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rainfall/numerics/rng.hpp"

namespace rainfall::mixture {

/// Σ_k π_k Ga(a_k, b_k) with b_k a scale: f(y) ∝ y^{a−1} e^{−y/b}.
struct GammaMixtureParams {
  std::vector<double> weights;
  std::vector<double> shapes;
  std::vector<double> scales;

  std::size_t size() const noexcept { return weights.size(); }
  bool operator==(const GammaMixtureParams&) const = default;
};

/// Damsleth conjugate prior: b ~ IG(u, v) and
/// p(a | b) ∝ ρ^{a−1} / (b^{a q} Γ(a)^r).
struct DamslethHyper {
  double u = 1.1;
  double v = 2.0;
  double rho = 1.0;
  double q = 1.0;
  double r = 1.0;
};

/// Throws DomainError on mismatched lengths, negative weights, weights not
/// summing to 1 (within 1e-9), or non-positive shapes/scales. K = 1 is
/// accepted; the estimator in this library targets K >= 2.
void validate(const GammaMixtureParams& params);

double mixture_log_pdf(double y, const GammaMixtureParams& params);
double mixture_cdf(double y, const GammaMixtureParams& params);
double mixture_quantile(double p, const GammaMixtureParams& params);

/// Component chosen by one uniform, value by inverting that component's
/// gamma CDF with a second.
std::vector<double> mixture_simulate(std::size_t n, const GammaMixtureParams& params, numerics::RngState& rng);

/// Log-likelihood plus log prior, up to the unstated normalizing constant
/// of p(a | b). Weights carry a flat prior over the simplex (contributes 0).
double log_posterior(std::span<const double> data, const GammaMixtureParams& params,
                     const DamslethHyper& hyper = {});

/// The prior part of log_posterior for a single component.
double log_component_prior(double shape, double scale, const DamslethHyper& hyper);

struct MapOptions {
  int restarts = 8;
  numerics::RngState rng{};
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct MapDiagnostics {
  bool converged = false;
  bool timed_out = false;
  /// Best objective value never got worse across optimizer iterations.
  bool monotone = true;
  bool small_sample = false;
  double log_posterior = 0.0;
  int best_restart = 0;
  int restarts = 0;
  int iterations = 0;
  std::string note;
};

struct MixtureFit {
  GammaMixtureParams params;  // components ordered by mean a·b ascending
  MapDiagnostics diagnostics;
};

/// ln a_k and ln b_k are confined to this range during optimization.
inline constexpr double kLogParamBound = 12.0;

/// MAP estimate of a K-component mixture by Nelder-Mead over (K − 1 free
/// softmax logits, ln a, ln b). Throws DataError if the data are empty or
/// non-positive, or if K > n / 10.
MixtureFit fit_map(std::span<const double> data, std::size_t components, const DamslethHyper& hyper = {},
                   const MapOptions& options = {});

}  // namespace rainfall::mixture
