#include "rainfall/gamma_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rainfall/errors.hpp"
#include "rainfall/numerics/nelder_mead.hpp"
#include "rainfall/numerics/roots.hpp"
#include "rainfall/numerics/special.hpp"

namespace rainfall::mixture {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> terms) {
  double m = -kInf;
  for (double t : terms) m = std::max(m, t);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

struct Compressed {
  std::vector<double> values, log_values, counts;
  double total = 0.0;
};

Compressed compress(std::span<const double> data) {
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  Compressed c;
  for (double y : sorted) {
    if (!c.values.empty() && c.values.back() == y) {
      c.counts.back() += 1.0;
    } else {
      c.values.push_back(y);
      c.log_values.push_back(std::log(y));
      c.counts.push_back(1.0);
    }
  }
  c.total = static_cast<double>(sorted.size());
  return c;
}

// θ = [logit_2..logit_K, ln a_1..ln a_K, ln b_1..ln b_K], logit_1 = 0.
struct Layout {
  std::size_t k;
  std::size_t dim() const { return 3 * k - 1; }
  std::size_t logit(std::size_t i) const { return i - 1; }
  std::size_t log_shape(std::size_t i) const { return k - 1 + i; }
  std::size_t log_scale(std::size_t i) const { return 2 * k - 1 + i; }
};

double bounded(double x) { return std::clamp(x, -kLogParamBound, kLogParamBound); }

GammaMixtureParams decode(std::span<const double> theta, const Layout& layout) {
  GammaMixtureParams p;
  p.weights.resize(layout.k);
  p.shapes.resize(layout.k);
  p.scales.resize(layout.k);
  double m = 0.0;
  for (std::size_t i = 1; i < layout.k; ++i) m = std::max(m, theta[layout.logit(i)]);
  double z = 0.0;
  for (std::size_t i = 0; i < layout.k; ++i) {
    p.weights[i] = std::exp((i == 0 ? 0.0 : theta[layout.logit(i)]) - m);
    z += p.weights[i];
  }
  for (std::size_t i = 0; i < layout.k; ++i) {
    p.weights[i] /= z;
    p.shapes[i] = std::exp(bounded(theta[layout.log_shape(i)]));
    p.scales[i] = std::exp(bounded(theta[layout.log_scale(i)]));
  }
  return p;
}

// Per-slice method-of-moments start.
std::vector<double> sliced_start(std::span<const double> sorted, const Layout& layout) {
  std::vector<double> theta(layout.dim(), 0.0);
  const std::size_t n = sorted.size();
  for (std::size_t i = 0; i < layout.k; ++i) {
    const std::size_t lo = i * n / layout.k;
    const std::size_t hi = (i + 1) * n / layout.k;
    const double count = static_cast<double>(hi - lo);
    double mean = 0.0;
    for (std::size_t j = lo; j < hi; ++j) mean += sorted[j];
    mean /= count;
    double var = 0.0;
    for (std::size_t j = lo; j < hi; ++j) var += (sorted[j] - mean) * (sorted[j] - mean);
    var /= count;
    if (!(var > 1e-12 * mean * mean)) var = 0.01 * mean * mean;
    theta[layout.log_shape(i)] = bounded(std::log(mean * mean / var));
    theta[layout.log_scale(i)] = bounded(std::log(var / mean));
    if (i > 0) {
      const double first = static_cast<double>(n / layout.k);
      theta[layout.logit(i)] = std::log(count / first);
    }
  }
  return theta;
}

}  // namespace

void validate(const GammaMixtureParams& p) {
  const std::size_t k = p.weights.size();
  if (k == 0) throw DomainError("gamma mixture: no components");
  if (p.shapes.size() != k || p.scales.size() != k) throw DomainError("gamma mixture: parameter lengths differ");
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(p.weights[i] >= 0.0 && p.weights[i] <= 1.0)) throw DomainError("gamma mixture: weights must lie in [0, 1]");
    if (!(p.shapes[i] > 0.0) || !std::isfinite(p.shapes[i])) throw DomainError("gamma mixture: shapes must be positive");
    if (!(p.scales[i] > 0.0) || !std::isfinite(p.scales[i])) throw DomainError("gamma mixture: scales must be positive");
    total += p.weights[i];
  }
  if (std::fabs(total - 1.0) > 1e-9) throw DomainError("gamma mixture: weights must sum to 1");
}

double mixture_log_pdf(double y, const GammaMixtureParams& params) {
  validate(params);
  if (!(y > 0.0)) throw DomainError("mixture_log_pdf: y must be positive");
  const double log_y = std::log(y);
  std::vector<double> terms(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double a = params.shapes[k];
    const double b = params.scales[k];
    terms[k] = std::log(params.weights[k]) - numerics::log_gamma(a) - a * std::log(b) + (a - 1.0) * log_y - y / b;
  }
  return log_sum_exp(terms);
}

double mixture_cdf(double y, const GammaMixtureParams& params) {
  validate(params);
  if (!(y >= 0.0)) throw DomainError("mixture_cdf: y must be non-negative");
  double total = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params.weights[k] == 0.0) continue;
    total += params.weights[k] * numerics::reg_lower_incomplete_gamma(params.shapes[k], y / params.scales[k]);
  }
  return std::clamp(total, 0.0, 1.0);
}

double mixture_quantile(double p, const GammaMixtureParams& params) {
  validate(params);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mixture_quantile: p must lie in (0, 1)");
  double max_mean = 0.0, max_sd = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    max_mean = std::max(max_mean, params.shapes[k] * params.scales[k]);
    max_sd = std::max(max_sd, params.scales[k] * std::sqrt(params.shapes[k]));
  }
  double hi = max_mean + 10.0 * max_sd;
  while (!(mixture_cdf(hi, params) > p)) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw ConvergenceError("mixture_quantile: could not bracket the quantile");
  }
  auto f = [&](double y) { return mixture_cdf(y, params) - p; };
  return numerics::brent_root(f, 0.0, hi, 0.0, 1e-14);
}

std::vector<double> mixture_simulate(std::size_t n, const GammaMixtureParams& params, numerics::RngState& rng) {
  validate(params);
  std::vector<double> cumulative(params.size());
  std::partial_sum(params.weights.begin(), params.weights.end(), cumulative.begin());
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * cumulative.back();
    std::size_t k = 0;
    while (k + 1 < params.size() && (pick >= cumulative[k] || params.weights[k] == 0.0)) ++k;
    out.push_back(params.scales[k] * numerics::gamma_quantile(rng.uniform(), params.shapes[k]));
  }
  return out;
}

double log_component_prior(double shape, double scale, const DamslethHyper& h) {
  const double log_b = std::log(scale);
  const double inverse_gamma = h.u * std::log(h.v) - numerics::log_gamma(h.u) - (h.u + 1.0) * log_b - h.v / scale;
  const double shape_given_scale =
      (shape - 1.0) * std::log(h.rho) - shape * h.q * log_b - h.r * numerics::log_gamma(shape);
  return inverse_gamma + shape_given_scale;
}

double log_posterior(std::span<const double> data, const GammaMixtureParams& params, const DamslethHyper& hyper) {
  validate(params);
  double total = 0.0;
  for (double y : data) total += mixture_log_pdf(y, params);
  for (std::size_t k = 0; k < params.size(); ++k) total += log_component_prior(params.shapes[k], params.scales[k], hyper);
  return total;
}

MixtureFit fit_map(std::span<const double> data, std::size_t components, const DamslethHyper& hyper,
                   const MapOptions& options) {
  if (data.empty()) throw DataError("fit_map: empty data");
  for (double y : data) {
    if (!(y > 0.0) || !std::isfinite(y)) throw DataError("fit_map: observations must be positive and finite");
  }
  if (components == 0) throw DomainError("fit_map: need at least one component");
  if (components * 10 > data.size()) throw DataError("fit_map: K must not exceed n / 10");

  const Layout layout{components};
  const Compressed c = compress(data);
  const std::size_t k_count = components;
  const double prior_log_u = hyper.u * std::log(hyper.v) - numerics::log_gamma(hyper.u);
  const double log_rho = std::log(hyper.rho);

  std::vector<double> log_weight(k_count), shape(k_count), scale(k_count), inv_scale(k_count), offset(k_count),
      terms(k_count);
  numerics::Objective objective = [&](std::span<const double> theta) {
    double m = 0.0;
    for (std::size_t i = 1; i < k_count; ++i) m = std::max(m, theta[layout.logit(i)]);
    double z = 0.0;
    for (std::size_t i = 0; i < k_count; ++i) z += std::exp((i == 0 ? 0.0 : theta[layout.logit(i)]) - m);
    const double log_z = std::log(z) + m;
    double prior = 0.0;
    for (std::size_t i = 0; i < k_count; ++i) {
      log_weight[i] = (i == 0 ? 0.0 : theta[layout.logit(i)]) - log_z;
      const double log_a = bounded(theta[layout.log_shape(i)]);
      const double log_b = bounded(theta[layout.log_scale(i)]);
      shape[i] = std::exp(log_a);
      scale[i] = std::exp(log_b);
      inv_scale[i] = 1.0 / scale[i];
      const double lg = numerics::log_gamma(shape[i]);
      offset[i] = log_weight[i] - lg - shape[i] * log_b;
      prior += prior_log_u - (hyper.u + 1.0) * log_b - hyper.v * inv_scale[i] + (shape[i] - 1.0) * log_rho -
               shape[i] * hyper.q * log_b - hyper.r * lg;
    }
    double loglik = 0.0;
    for (std::size_t n = 0; n < c.values.size(); ++n) {
      double mx = -kInf;
      for (std::size_t i = 0; i < k_count; ++i) {
        terms[i] = offset[i] + (shape[i] - 1.0) * c.log_values[n] - c.values[n] * inv_scale[i];
        mx = std::max(mx, terms[i]);
      }
      double s = 0.0;
      for (std::size_t i = 0; i < k_count; ++i) s += std::exp(terms[i] - mx);
      loglik += c.counts[n] * (mx + std::log(s));
    }
    return -(loglik + prior);
  };

  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  const std::vector<double> base = sliced_start(sorted, layout);

  numerics::NelderMeadOptions nm_opts;
  nm_opts.initial_step = {0.3};
  nm_opts.deadline = options.deadline;

  MapDiagnostics diag;
  double best = kInf;
  std::vector<double> best_theta;
  const int total = std::max(1, options.restarts);
  for (int r = 0; r < total; ++r) {
    std::vector<double> init = base;
    if (r > 0) {
      numerics::RngState local = options.rng.derive(static_cast<std::uint64_t>(r));
      for (std::size_t i = 0; i < k_count; ++i) {
        if (i > 0) init[layout.logit(i)] += 0.5 * local.normal();
        init[layout.log_shape(i)] = bounded(init[layout.log_shape(i)] + 0.3 * local.normal());
        init[layout.log_scale(i)] = bounded(init[layout.log_scale(i)] + 0.3 * local.normal());
      }
    }
    const numerics::NelderMeadResult nm = numerics::nelder_mead_polished(objective, init, nm_opts, 0.05);
    diag.iterations += nm.iterations;
    ++diag.restarts;
    diag.monotone = diag.monotone && nm.monotone;
    if (nm.value < best || best_theta.empty()) {
      best = nm.value;
      best_theta = nm.argmin;
      diag.converged = nm.converged && std::isfinite(nm.value);
      diag.best_restart = r;
    }
    if (nm.timed_out) {
      diag.timed_out = true;
      diag.converged = false;
      break;
    }
  }

  MixtureFit fit;
  GammaMixtureParams raw = decode(best_theta, layout);
  std::vector<std::size_t> order(k_count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw.shapes[a] * raw.scales[a] < raw.shapes[b] * raw.scales[b];
  });
  for (std::size_t i : order) {
    fit.params.weights.push_back(raw.weights[i]);
    fit.params.shapes.push_back(raw.shapes[i]);
    fit.params.scales.push_back(raw.scales[i]);
  }
  diag.log_posterior = -best;
  diag.small_sample = data.size() < 50 * components;
  if (diag.timed_out) {
    diag.note = "fit timed out";
  } else if (diag.small_sample) {
    diag.note = "small sample for this component count";
  }
  fit.diagnostics = std::move(diag);
  return fit;
}

}  // namespace rainfall::mixture
