#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rainfall/corpus.hpp"
#include "rainfall/evaluation.hpp"
#include "rainfall/numerics/rng.hpp"

namespace rainfall::pipeline {

struct RunConfig {
  std::vector<eval::MethodId> methods{eval::kAllMethods.begin(), eval::kAllMethods.end()};
  eval::QuantileSet quantiles;
  double threshold_mm = 1.0;
  int egpd_restarts = 4;     // jittered restarts on top of the default start
  int mixture_restarts = 8;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::chrono::duration<double> timeout{60.0};
  std::size_t min_wet = corpus::kDefaultMinWet;
  bool svg = false;

  /// Throws ConfigError on an empty or duplicated method list, invalid
  /// quantiles, a non-positive threshold, timeout or worker count.
  void validate() const;
};

/// Fits one method to one site. Never throws for data or numerical
/// problems; those are recorded in FitResult::error.
eval::FitResult run_fit(const corpus::SiteSeries& site, eval::MethodId method, const RunConfig& config,
                        const numerics::RngState& rng);

/// RNG stream for task (site index, method): RngState(seed, site).derive(method).
numerics::RngState task_rng(std::uint64_t seed, std::size_t site_index, eval::MethodId method);

/// Fits every (site, method) pair on `config.jobs` worker threads. The
/// result order is site-major, then config.methods order, whatever the
/// scheduling.
std::vector<eval::FitResult> fit_grid(std::span<const corpus::SiteSeries> sites, const RunConfig& config);

/// Fit record as written to fits.jsonl (fit_seconds is kept out).
nlohmann::json to_json(const eval::FitResult& result);
eval::FitResult fit_result_from_json(const nlohmann::json& j);

std::string records_jsonl(std::span<const eval::FitResult> results);
/// Reads a fits.jsonl file; ConfigError on malformed lines.
std::vector<eval::FitResult> read_records(const std::filesystem::path& path);

inline constexpr const char* kRecordsFile = "fits.jsonl";
inline constexpr const char* kTimingsFile = "timings.jsonl";

struct BenchmarkOutcome {
  std::vector<eval::FitResult> results;
  eval::EvaluationSummary summary;
  std::size_t sites_used = 0;
  std::size_t sites_excluded = 0;
  std::vector<std::filesystem::path> files;
};

/// Filters sites by min_wet, fits the grid, and writes fits.jsonl,
/// timings.jsonl and the report bundle into `out_dir`.
BenchmarkOutcome run_benchmark(std::vector<corpus::SiteSeries> sites, const RunConfig& config,
                               const std::filesystem::path& out_dir);

}  // namespace rainfall::pipeline
