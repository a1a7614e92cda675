#include "rainfall/egpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rainfall/empirical.hpp"
#include "rainfall/errors.hpp"
#include "rainfall/numerics/nelder_mead.hpp"
#include "rainfall/numerics/quadrature.hpp"
#include "rainfall/numerics/special.hpp"

namespace rainfall::egpd {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kConditionalPanels = 64;
constexpr double kPwmResidualTol = 1e-6;

// ξ ∈ (kXiLower, kXiUpper) <-> unconstrained t.
double xi_from_free(double t) { return kXiLower + (kXiUpper - kXiLower) / (1.0 + std::exp(-t)); }
double free_from_xi(double xi) {
  const double s = (xi - kXiLower) / (kXiUpper - kXiLower);
  return std::log(s / (1.0 - s));
}

// Q(p) without argument checks; p^{1/κ} is formed in log space.
double quantile_from_log_tail(double log_tail, double sigma, double xi) {
  if (std::fabs(xi) < kXiZero) return -sigma * log_tail;
  return sigma / xi * std::expm1(-xi * log_tail);
}

double quantile_raw(double p, double kappa, double sigma, double xi) {
  const double one_minus = -std::expm1(std::log(p) / kappa);  // 1 − p^{1/κ}
  return quantile_from_log_tail(std::log(one_minus), sigma, xi);
}

// Quantile at u = 1 − r, accurate when r is tiny.
double quantile_upper(double r, double kappa, double sigma, double xi) {
  const double one_minus = -std::expm1(std::log1p(-r) / kappa);
  return quantile_from_log_tail(std::log(one_minus), sigma, xi);
}

// g_j(κ, ξ) = κ·B(κ(j+1), 1 − ξ) − 1/(j+1), written as expm1 of a log so
// that the ξ → 0 cancellation keeps relative accuracy.
double pwm_shape_factor(int j, double kappa, double xi) {
  const double c = kappa * (j + 1);
  const double log_cb = numerics::log_gamma(c + 1.0) + numerics::log_gamma(1.0 - xi) - numerics::log_gamma(c + 1.0 - xi);
  return std::expm1(log_cb) / (j + 1);
}

void require_data(std::span<const double> data) {
  if (data.empty()) throw DataError("EGPD fit: empty data");
  for (double y : data) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DataError("EGPD fit: observations must be positive and finite");
  }
}

double mean_of(std::span<const double> data) {
  return std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
}

struct WeightedData {
  std::vector<double> values;
  std::vector<double> counts;
  double n_below = 0.0;
};

// Distinct values >= threshold with multiplicities; rainfall gauges report
// on a fixed grid, so this often shrinks the likelihood loop considerably.
WeightedData compress(std::span<const double> data, double threshold) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  WeightedData out;
  for (double y : sorted) {
    if (y < threshold) {
      out.n_below += 1.0;
      continue;
    }
    if (!out.values.empty() && out.values.back() == y) {
      out.counts.back() += 1.0;
    } else {
      out.values.push_back(y);
      out.counts.push_back(1.0);
    }
  }
  return out;
}

struct Start {
  double kappa, sigma, xi;
};

// Default start for restart 0, multiplicative jitter (factor within
// e^{±0.5}) for the rest.
Start jittered_start(const Start& base, int restart, const numerics::RngState& rng) {
  if (restart == 0) return base;
  numerics::RngState local = rng.derive(static_cast<std::uint64_t>(restart));
  auto factor = [&] { return std::exp(std::clamp(0.25 * local.normal(), -0.5, 0.5)); };
  Start s = base;
  s.kappa *= factor();
  s.sigma *= factor();
  s.xi = std::clamp(s.xi * factor(), kXiLower + 1e-3, kXiUpper - 1e-3);
  return s;
}

bool near_box_edge(double xi) { return xi < kXiLower + 1e-3 || xi > kXiUpper - 1e-3; }

template <class MakeInit>
FitDiagnostics run_restarts(const numerics::Objective& objective, const FitOptions& options, MakeInit make_init,
                            numerics::NelderMeadOptions nm_opts, double polish_step, std::vector<double>& best_x) {
  nm_opts.deadline = options.deadline;
  FitDiagnostics diag;
  const int total = 1 + std::max(0, options.jitter_restarts);
  double best = kInf;
  bool best_converged = false;
  for (int r = 0; r < total; ++r) {
    const std::vector<double> init = make_init(r);
    const numerics::NelderMeadResult nm = numerics::nelder_mead_polished(objective, init, nm_opts, polish_step);
    diag.iterations += nm.iterations;
    ++diag.restarts;
    if (nm.value < best || best_x.empty()) {
      best = nm.value;
      best_x = nm.argmin;
      best_converged = nm.converged;
      diag.best_restart = r;
    }
    if (nm.timed_out) {
      diag.timed_out = true;
      break;
    }
  }
  diag.converged = best_converged && std::isfinite(best);
  diag.objective = best;
  return diag;
}

}  // namespace

double EgpdParams::upper_support() const { return xi < -kXiZero ? -sigma / xi : kInf; }

void validate(const EgpdParams& p) {
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa)) throw DomainError("EGPD: kappa must be positive and finite");
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) throw DomainError("EGPD: sigma must be positive and finite");
  if (!std::isfinite(p.xi)) throw DomainError("EGPD: xi must be finite");
}

double gp_cdf(double y, double sigma, double xi) {
  if (!(y >= 0.0)) throw DomainError("gp_cdf: y must be non-negative");
  if (!(sigma > 0.0)) throw DomainError("gp_cdf: sigma must be positive");
  if (std::isinf(y)) return 1.0;
  double h;
  if (std::fabs(xi) < kXiZero) {
    h = -std::expm1(-y / sigma);
  } else {
    const double z = xi * y / sigma;
    if (z <= -1.0) return 1.0;  // at or beyond the upper end point for ξ < 0
    h = -std::expm1(-std::log1p(z) / xi);
  }
  return std::clamp(h, 0.0, 1.0);
}

double egpd_cdf(double y, const EgpdParams& params) {
  validate(params);
  const double h = gp_cdf(y, params.sigma, params.xi);
  if (h <= 0.0) return 0.0;
  return std::exp(params.kappa * std::log(h));
}

double egpd_log_pdf(double y, const EgpdParams& params) {
  validate(params);
  if (!(y > 0.0)) throw DomainError("egpd_log_pdf: y must be positive");
  const double log_sigma = std::log(params.sigma);
  double log_h, log_H;
  if (std::fabs(params.xi) < kXiZero) {
    log_h = -log_sigma - y / params.sigma;
    log_H = std::log(-std::expm1(-y / params.sigma));
  } else {
    const double z = params.xi * y / params.sigma;
    if (z <= -1.0) return -kInf;
    const double l = std::log1p(z);
    log_h = -log_sigma - (1.0 / params.xi + 1.0) * l;
    log_H = std::log(-std::expm1(-l / params.xi));
  }
  return std::log(params.kappa) + log_h + (params.kappa - 1.0) * log_H;
}

double egpd_quantile(double p, const EgpdParams& params) {
  validate(params);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("egpd_quantile: p must lie in (0, 1)");
  return quantile_raw(p, params.kappa, params.sigma, params.xi);
}

std::vector<double> egpd_simulate(std::size_t n, const EgpdParams& params, numerics::RngState& rng) {
  validate(params);
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(quantile_raw(rng.uniform(), params.kappa, params.sigma, params.xi));
  return out;
}

double theoretical_pwm(int j, const EgpdParams& params) {
  validate(params);
  if (j < 0 || j > 2) throw DomainError("theoretical_pwm: order must be 0, 1 or 2");
  if (!(params.xi < 1.0 - 1e-6)) throw DomainError("theoretical_pwm: requires xi < 1");
  if (std::fabs(params.xi) < kXiZero) {
    // Exponential limit: σ/(j+1)·[ψ(κ(j+1) + 1) + γ].
    const double c = params.kappa * (j + 1);
    return params.sigma / (j + 1) * (numerics::digamma(c + 1.0) + std::numbers::egamma);
  }
  return params.sigma / params.xi * pwm_shape_factor(j, params.kappa, params.xi);
}

std::array<double, 3> conditional_pwms(const EgpdParams& params, double threshold) {
  validate(params);
  if (!(threshold >= 0.0)) throw DomainError("conditional_pwms: threshold must be non-negative");
  const double p_lower = egpd_cdf(threshold, params);
  if (!(p_lower < 1.0)) return {kInf, kInf, kInf};
  const double width = 1.0 - p_lower;
  const auto& rule = numerics::gauss_legendre_rule();
  const double panel = 1.0 / static_cast<double>(kConditionalPanels);
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  // t = 1 − s⁴ absorbs the (1 − t)^{−ξ} growth of Q at the upper end.
  for (std::size_t k = 0; k < kConditionalPanels; ++k) {
    const double mid = (static_cast<double>(k) + 0.5) * panel;
    for (std::size_t i = 0; i < numerics::kGaussOrder; ++i) {
      const double s = mid + 0.5 * panel * rule.nodes[i];
      const double s4 = s * s * s * s;
      const double t = 1.0 - s4;
      const double q = quantile_upper(width * s4, params.kappa, params.sigma, params.xi);
      const double w = rule.weights[i] * q * 4.0 * s * s * s;
      acc[0] += w;
      acc[1] += w * t;
      acc[2] += w * t * t;
    }
  }
  for (double& a : acc) a *= 0.5 * panel;
  return acc;
}

namespace {

EgpdFit fit_likelihood(std::span<const double> data, std::optional<double> threshold, const FitOptions& options) {
  require_data(data);
  if (data.size() < kMinObservations) throw DataError("EGPD fit: need at least 30 observations");
  const WeightedData wd = compress(data, threshold.value_or(0.0));
  if (wd.values.empty()) throw DataError("EGPD censored fit: all observations fall below the threshold");
  double n_above = 0.0;
  for (double c : wd.counts) n_above += c;
  if (n_above < static_cast<double>(kMinObservations))
    throw DataError("EGPD censored fit: need at least 30 observations at or above the threshold");

  const double y_lower = threshold.value_or(0.0);
  const double n_below = wd.n_below;
  numerics::Objective nll = [&wd, y_lower, n_below](std::span<const double> theta) {
    const double log_kappa = theta[0];
    const double kappa = std::exp(log_kappa);
    const double log_sigma = theta[1];
    const double sigma = std::exp(log_sigma);
    const double xi = xi_from_free(theta[2]);
    const bool exponential = std::fabs(xi) < kXiZero;
    double s = 0.0;
    for (std::size_t i = 0; i < wd.values.size(); ++i) {
      const double y = wd.values[i];
      double log_h, log_H;
      if (exponential) {
        log_h = -log_sigma - y / sigma;
        log_H = std::log(-std::expm1(-y / sigma));
      } else {
        const double z = xi * y / sigma;
        if (z <= -1.0) return kInf;
        const double l = std::log1p(z);
        log_h = -log_sigma - (1.0 / xi + 1.0) * l;
        log_H = std::log(-std::expm1(-l / xi));
      }
      s += wd.counts[i] * (log_kappa + log_h + (kappa - 1.0) * log_H);
    }
    if (n_below > 0.0) s += n_below * kappa * std::log(gp_cdf(y_lower, sigma, xi));
    return -s;
  };

  const Start base{1.0, mean_of(data), 0.1};
  auto make_init = [&](int r) {
    const Start s = jittered_start(base, r, options.rng);
    return std::vector<double>{std::log(s.kappa), std::log(s.sigma), free_from_xi(s.xi)};
  };
  numerics::NelderMeadOptions nm_opts;
  nm_opts.initial_step = {0.3};
  std::vector<double> best;
  FitDiagnostics diag = run_restarts(nll, options, make_init, nm_opts, 0.05, best);

  EgpdFit fit;
  fit.params = {std::exp(best[0]), std::exp(best[1]), xi_from_free(best[2])};
  diag.objective = -diag.objective;
  const double mean = base.sigma;
  diag.at_boundary = near_box_edge(fit.params.xi) || std::fabs(best[0]) > 8.0 ||
                     fit.params.sigma < 1e-6 * mean || fit.params.sigma > 1e6 * mean;
  if (wd.values.size() + (n_below > 0.0 ? 1 : 0) < 2) {
    diag.converged = false;
    diag.note = "degenerate sample: fewer than two distinct values";
  } else if (diag.at_boundary) {
    diag.note = "estimate at the edge of the parameter box";
  }
  fit.diagnostics = std::move(diag);
  return fit;
}

std::array<double, 3> sample_pwms(const empirical::SortedSample& sample) {
  return {empirical::empirical_pwm(sample, 0), empirical::empirical_pwm(sample, 1),
          empirical::empirical_pwm(sample, 2)};
}

// Clamp ξ away from the exponential branch where g_j/ξ is 0/0.
double pwm_solver_xi(double t) {
  const double xi = xi_from_free(t);
  if (std::fabs(xi) < kXiZero) return xi < 0.0 ? -kXiZero : kXiZero;
  return xi;
}

numerics::NelderMeadOptions pwm_nm_options() {
  numerics::NelderMeadOptions o;
  o.initial_step = {0.3};
  o.f_tol = 1e-28;
  o.x_tol = 1e-10;
  o.max_iterations = 2000;
  return o;
}

}  // namespace

EgpdFit fit_mle(std::span<const double> data, const FitOptions& options) {
  return fit_likelihood(data, std::nullopt, options);
}

EgpdFit fit_mle_censored(std::span<const double> data, const CensoringSpec& spec, const FitOptions& options) {
  if (!(spec.threshold > 0.0)) throw DomainError("censoring threshold must be positive");
  return fit_likelihood(data, spec.threshold, options);
}

EgpdFit fit_pwm_from_moments(const std::array<double, 3>& pwms, const FitOptions& options) {
  if (!(pwms[0] > 0.0)) throw DataError("PWM fit: first moment must be positive");
  const double r1 = pwms[1] / pwms[0];
  const double r2 = pwms[2] / pwms[0];
  numerics::Objective residual = [r1, r2](std::span<const double> theta) {
    const double kappa = std::exp(theta[0]);
    const double xi = pwm_solver_xi(theta[1]);
    const double g0 = pwm_shape_factor(0, kappa, xi);
    const double e1 = pwm_shape_factor(1, kappa, xi) / g0 - r1;
    const double e2 = pwm_shape_factor(2, kappa, xi) / g0 - r2;
    return e1 * e1 + e2 * e2;
  };
  const Start base{1.0, 1.0, 0.1};
  auto make_init = [&](int r) {
    const Start s = jittered_start(base, r, options.rng);
    return std::vector<double>{std::log(s.kappa), free_from_xi(s.xi)};
  };
  std::vector<double> best;
  FitDiagnostics diag = run_restarts(residual, options, make_init, pwm_nm_options(), 0.05, best);

  EgpdFit fit;
  const double kappa = std::exp(best[0]);
  const double xi = pwm_solver_xi(best[1]);
  fit.params = {kappa, xi * pwms[0] / pwm_shape_factor(0, kappa, xi), xi};
  diag.objective = std::sqrt(diag.objective);
  diag.converged = std::isfinite(diag.objective) && diag.objective <= kPwmResidualTol;
  diag.at_boundary = near_box_edge(xi) || std::fabs(best[0]) > 8.0;
  if (!diag.converged) diag.note = "PWM system residual above tolerance";
  fit.diagnostics = std::move(diag);
  return fit;
}

EgpdFit fit_pwm(std::span<const double> data, const FitOptions& options) {
  require_data(data);
  if (data.size() < kMinObservations) throw DataError("EGPD fit: need at least 30 observations");
  const auto sample = empirical::SortedSample::from(data);
  EgpdFit fit = fit_pwm_from_moments(sample_pwms(sample), options);
  if (sample.min() == sample.max()) {
    fit.diagnostics.converged = false;
    fit.diagnostics.note = "degenerate sample: fewer than two distinct values";
  }
  return fit;
}

EgpdFit fit_pwm_censored_from_moments(const std::array<double, 3>& target, double threshold, double mean_hint,
                                      const FitOptions& options) {
  if (!(threshold > 0.0)) throw DomainError("censoring threshold must be positive");
  for (double v : target) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DataError("censored PWM fit: exceedance moments must be positive");
  }
  numerics::Objective residual = [&target, threshold](std::span<const double> theta) {
    // Keeps the simplex from walking off along a saturated direction.
    if (std::fabs(theta[0]) > 12.0 || std::fabs(theta[1]) > 30.0 || std::fabs(theta[2]) > 25.0) return kInf;
    const EgpdParams p{std::exp(theta[0]), std::exp(theta[1]), xi_from_free(theta[2])};
    const auto model = conditional_pwms(p, threshold);
    double s = 0.0;
    for (int j = 0; j < 3; ++j) {
      const double e = (model[j] - target[j]) / target[j];
      s += e * e;
    }
    return s;
  };
  const Start base{1.0, mean_hint > 0.0 ? mean_hint : target[0], 0.1};
  auto make_init = [&](int r) {
    const Start s = jittered_start(base, r, options.rng);
    return std::vector<double>{std::log(s.kappa), std::log(s.sigma), free_from_xi(s.xi)};
  };
  std::vector<double> best;
  FitDiagnostics diag = run_restarts(residual, options, make_init, pwm_nm_options(), 0.05, best);

  EgpdFit fit;
  fit.params = {std::exp(best[0]), std::exp(best[1]), xi_from_free(best[2])};
  diag.objective = std::sqrt(diag.objective);
  diag.converged = std::isfinite(diag.objective) && diag.objective <= kPwmResidualTol;
  diag.at_boundary = near_box_edge(fit.params.xi) || std::fabs(best[0]) > 8.0;
  if (!diag.converged) diag.note = "conditional PWM residual above tolerance";
  fit.diagnostics = std::move(diag);
  return fit;
}

EgpdFit fit_pwm_censored(std::span<const double> data, const CensoringSpec& spec, const FitOptions& options) {
  require_data(data);
  std::vector<double> exceed;
  for (double y : data) {
    if (y >= spec.threshold) exceed.push_back(y);
  }
  if (exceed.empty()) throw DataError("EGPD censored fit: all observations fall below the threshold");
  if (exceed.size() < kMinObservations)
    throw DataError("EGPD censored fit: need at least 30 observations at or above the threshold");
  const auto sample = empirical::SortedSample(std::move(exceed));
  EgpdFit fit = fit_pwm_censored_from_moments(sample_pwms(sample), spec.threshold, mean_of(data), options);
  if (sample.min() == sample.max()) {
    fit.diagnostics.converged = false;
    fit.diagnostics.note = "degenerate sample: fewer than two distinct exceedances";
  }
  return fit;
}

}  // namespace rainfall::egpd
