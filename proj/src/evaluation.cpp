#include "rainfall/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

#include "rainfall/empirical.hpp"
#include "rainfall/errors.hpp"

namespace rainfall::eval {
namespace {

struct MethodNames {
  MethodId id;
  std::string_view key;
  std::string_view label;
};

constexpr std::array<MethodNames, 7> kNames = {{
    {MethodId::NaveauMle, "NaveauMle", "Naveau-MLE"},
    {MethodId::NaveauPwm, "NaveauPwm", "Naveau-PWM"},
    {MethodId::NaveauMleC, "NaveauMleC", "Naveau-MLE-c"},
    {MethodId::NaveauPwmC, "NaveauPwmC", "Naveau-PWM-c"},
    {MethodId::GammaMixture2, "GammaMixture2", "Gamma-Mixture-2"},
    {MethodId::GammaMixture3, "GammaMixture3", "Gamma-Mixture-3"},
    {MethodId::GammaMixture4, "GammaMixture4", "Gamma-Mixture-4"},
}};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::optional<std::size_t> find_probability(const std::vector<double>& probs, double p) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] == p) return i;
  }
  return std::nullopt;
}

}  // namespace

std::string_view method_key(MethodId m) { return kNames[static_cast<std::size_t>(m)].key; }
std::string_view method_label(MethodId m) { return kNames[static_cast<std::size_t>(m)].label; }

std::optional<MethodId> parse_method(std::string_view text) {
  for (const auto& n : kNames) {
    if (iequals(text, n.key) || iequals(text, n.label)) return n.id;
  }
  return std::nullopt;
}

std::size_t mixture_components(MethodId m) {
  switch (m) {
    case MethodId::GammaMixture2: return 2;
    case MethodId::GammaMixture3: return 3;
    case MethodId::GammaMixture4: return 4;
    default: return 0;
  }
}

void QuantileSet::validate() const {
  if (probabilities.empty()) throw ConfigError("quantile set is empty");
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile probabilities must lie in (0, 1)");
    if (i > 0 && !(p > probabilities[i - 1])) throw ConfigError("quantile probabilities must be strictly ascending");
  }
}

std::string format_probability(double p) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, p);
  return std::string(buf, res.ptr);
}

char classification_code(Classification c) {
  switch (c) {
    case Classification::Under: return 'U';
    case Classification::Over: return 'O';
    case Classification::Nominal: return 'N';
  }
  return '?';
}

double log_ratio_metric(double q_model, double q_empirical) {
  if (!(q_model > 0.0) || !(q_empirical > 0.0)) throw DomainError("log_ratio_metric: quantiles must be positive");
  return std::log(q_model / q_empirical);
}

Classification classify_quartiles(double q1, double q3) {
  if (q3 < 0.0) return Classification::Under;
  if (q1 > 0.0) return Classification::Over;
  return Classification::Nominal;
}

Classification classify(std::span<const double> d_values) {
  if (d_values.size() < 4) throw DataError("classify: need at least 4 values");
  std::vector<double> sorted(d_values.begin(), d_values.end());
  std::sort(sorted.begin(), sorted.end());
  return classify_quartiles(empirical::type7_quantile(sorted, 0.25), empirical::type7_quantile(sorted, 0.75));
}

BoxStats box_stats(std::span<const double> values) {
  if (values.empty()) throw DataError("box_stats: empty input");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  BoxStats s;
  s.min = v.front();
  s.max = v.back();
  s.q1 = empirical::type7_quantile(v, 0.25);
  s.median = empirical::type7_quantile(v, 0.5);
  s.q3 = empirical::type7_quantile(v, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q1;
  s.whisker_high = s.q3;
  for (double x : v) {
    if (x >= lo_fence) {
      s.whisker_low = std::min(x, s.q1);
      break;
    }
  }
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    if (*it <= hi_fence) {
      s.whisker_high = std::max(*it, s.q3);
      break;
    }
  }
  s.outliers = static_cast<std::size_t>(
      std::count_if(v.begin(), v.end(), [&](double x) { return x < lo_fence || x > hi_fence; }));
  return s;
}

const SummaryCell& EvaluationSummary::at(MethodId m, std::size_t p_index) const {
  const auto it = std::find(methods.begin(), methods.end(), m);
  if (it == methods.end() || p_index >= quantiles.size()) throw std::out_of_range("EvaluationSummary::at");
  return cells[static_cast<std::size_t>(it - methods.begin()) * quantiles.size() + p_index];
}

EvaluationSummary summarize(std::span<const FitResult> results, const QuantileSet& quantiles) {
  if (results.empty()) throw DataError("summarize: no fit results");
  quantiles.validate();
  EvaluationSummary out;
  out.quantiles = quantiles;
  for (MethodId m : kAllMethods) {
    if (std::any_of(results.begin(), results.end(), [m](const FitResult& r) { return r.method == m; }))
      out.methods.push_back(m);
  }

  const std::size_t np = quantiles.size();
  for (MethodId m : out.methods) {
    std::vector<std::vector<double>> d(np);
    std::vector<std::size_t> failed(np, 0), excluded(np, 0);
    for (const FitResult& r : results) {
      if (r.method != m) continue;
      const bool usable = r.error.empty() && r.converged;
      for (std::size_t j = 0; j < np; ++j) {
        if (!usable) {
          ++failed[j];
          continue;
        }
        const auto idx = find_probability(r.probabilities, quantiles.probabilities[j]);
        if (!idx || *idx >= r.estimated_quantiles.size() || *idx >= r.empirical_quantiles.size())
          throw DataError("summarize: result for site " + r.site_id + " lacks p=" +
                          format_probability(quantiles.probabilities[j]));
        const double qm = r.estimated_quantiles[*idx];
        const double qe = r.empirical_quantiles[*idx];
        if (!(qe > 0.0) || !(qm > 0.0) || !std::isfinite(qm) || !std::isfinite(qe)) {
          ++excluded[j];
          continue;
        }
        d[j].push_back(log_ratio_metric(qm, qe));
      }
    }
    for (std::size_t j = 0; j < np; ++j) {
      SummaryCell cell;
      cell.method = m;
      cell.p = quantiles.probabilities[j];
      cell.n_sites = d[j].size();
      cell.n_failed = failed[j];
      cell.n_excluded = excluded[j];
      if (!d[j].empty()) {
        cell.stats = box_stats(d[j]);
        cell.cls = classify_quartiles(cell.stats->q1, cell.stats->q3);
      }
      if (excluded[j] > 0) {
        out.warnings.push_back(std::string(method_key(m)) + " p=" + format_probability(cell.p) + ": " +
                               std::to_string(excluded[j]) + " site(s) excluded for non-positive quantiles");
      }
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

double asinh_axis_transform(double x, double scale) { return std::asinh(scale * x); }

}  // namespace rainfall::eval
