#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace rainfall::eval {

enum class MethodId {
  NaveauMle,
  NaveauPwm,
  NaveauMleC,
  NaveauPwmC,
  GammaMixture2,
  GammaMixture3,
  GammaMixture4,
};

inline constexpr std::array<MethodId, 7> kAllMethods = {
    MethodId::NaveauMle,     MethodId::NaveauPwm,     MethodId::NaveauMleC,    MethodId::NaveauPwmC,
    MethodId::GammaMixture2, MethodId::GammaMixture3, MethodId::GammaMixture4,
};

/// Identifier used in files and on the command line, e.g. "NaveauMleC".
std::string_view method_key(MethodId m);
/// Display label used in rendered tables, e.g. "Naveau-MLE-c".
std::string_view method_label(MethodId m);
/// Accepts either the key or the label (case-insensitive).
std::optional<MethodId> parse_method(std::string_view text);
/// Component count for the gamma mixture methods, 0 otherwise.
std::size_t mixture_components(MethodId m);

/// Probabilities at which quantiles are compared; strictly ascending in (0, 1).
struct QuantileSet {
  std::vector<double> probabilities{0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99};

  /// Throws ConfigError if empty, unsorted, duplicated or outside (0, 1).
  void validate() const;
  std::size_t size() const noexcept { return probabilities.size(); }
};

/// Shortest round-trip text for a probability ("0.01", "0.5").
std::string format_probability(double p);

/// Outcome of one (site, method) fit.
struct FitResult {
  std::string site_id;
  MethodId method = MethodId::NaveauMle;
  /// Aligned with the run's QuantileSet; empty when the fit threw.
  std::vector<double> estimated_quantiles;
  /// Empirical quantiles of the site sample at the same probabilities.
  std::vector<double> empirical_quantiles;
  std::vector<double> probabilities;
  bool converged = false;
  double fit_seconds = 0.0;
  nlohmann::json params;       // family-specific parameter record
  nlohmann::json diagnostics;  // fitter diagnostics
  std::string error;           // non-empty when the fit could not run
};

enum class Classification { Under, Over, Nominal };
char classification_code(Classification c);

/// ln(q_model / q_empirical). DomainError unless both are positive.
double log_ratio_metric(double q_model, double q_empirical);

/// U if Q3 < 0, O if Q1 > 0, N otherwise (an IQR touching zero contains
/// it). Quartiles are type-7. Requires at least 4 values.
Classification classify(std::span<const double> d_values);
/// The same rule applied to precomputed quartiles.
Classification classify_quartiles(double q1, double q3);

/// Tukey boxplot statistics (whiskers at the most extreme values within
/// 1.5·IQR of the quartiles).
struct BoxStats {
  double min = 0.0, whisker_low = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, whisker_high = 0.0, max = 0.0;
  std::size_t outliers = 0;
};
BoxStats box_stats(std::span<const double> values);

struct SummaryCell {
  MethodId method{};
  double p = 0.0;
  std::size_t n_sites = 0;    // D values entering the statistics
  std::size_t n_failed = 0;   // fits that failed or did not converge
  std::size_t n_excluded = 0; // non-positive quantiles at this p
  std::optional<BoxStats> stats;
  std::optional<Classification> cls;
};

struct EvaluationSummary {
  std::vector<MethodId> methods;  // in canonical order, only those present
  QuantileSet quantiles;
  std::vector<SummaryCell> cells; // row-major: method, then p
  std::vector<std::string> warnings;

  const SummaryCell& at(MethodId m, std::size_t p_index) const;
};

/// Aggregates D^p_m(s) over sites for every method present in `results`.
/// Each result must carry quantiles for the probabilities in `quantiles`
/// (looked up by value). Failed or non-converged fits are counted but
/// excluded. Deterministic and independent of the order of `results`.
EvaluationSummary summarize(std::span<const FitResult> results, const QuantileSet& quantiles);

/// asinh(scale·x), the display transform for D distributions.
double asinh_axis_transform(double x, double scale = 8.0);

}  // namespace rainfall::eval
