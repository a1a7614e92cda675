#include "rainfall/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <set>
#include <thread>

#include "rainfall/egpd.hpp"
#include "rainfall/empirical.hpp"
#include "rainfall/errors.hpp"
#include "rainfall/gamma_mixture.hpp"
#include "rainfall/report.hpp"

namespace rainfall::pipeline {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

json diagnostics_json(const egpd::FitDiagnostics& d) {
  return {{"converged", d.converged},   {"at_boundary", d.at_boundary}, {"timed_out", d.timed_out},
          {"objective", d.objective},   {"best_restart", d.best_restart}, {"restarts", d.restarts},
          {"iterations", d.iterations}, {"note", d.note}};
}

json diagnostics_json(const mixture::MapDiagnostics& d) {
  return {{"converged", d.converged},         {"timed_out", d.timed_out},       {"monotone", d.monotone},
          {"small_sample", d.small_sample},   {"log_posterior", d.log_posterior}, {"best_restart", d.best_restart},
          {"restarts", d.restarts},           {"iterations", d.iterations},     {"note", d.note}};
}

bool strictly_increasing_finite(const std::vector<double>& q) {
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) return false;
    if (i > 0 && !(q[i] > q[i - 1])) return false;
  }
  return true;
}

std::size_t method_index(eval::MethodId m) {
  return static_cast<std::size_t>(std::find(eval::kAllMethods.begin(), eval::kAllMethods.end(), m) -
                                  eval::kAllMethods.begin());
}

}  // namespace

void RunConfig::validate() const {
  if (methods.empty()) throw ConfigError("no methods selected");
  std::set<eval::MethodId> seen(methods.begin(), methods.end());
  if (seen.size() != methods.size()) throw ConfigError("duplicate method in method list");
  quantiles.validate();
  if (!(threshold_mm > 0.0) || !std::isfinite(threshold_mm)) throw ConfigError("threshold must be positive");
  if (!(timeout.count() > 0.0)) throw ConfigError("timeout must be positive");
  if (jobs == 0) throw ConfigError("jobs must be at least 1");
  if (egpd_restarts < 0 || mixture_restarts < 1) throw ConfigError("invalid restart counts");
}

numerics::RngState task_rng(std::uint64_t seed, std::size_t site_index, eval::MethodId method) {
  return numerics::RngState(seed, site_index).derive(method_index(method));
}

eval::FitResult run_fit(const corpus::SiteSeries& site, eval::MethodId method, const RunConfig& config,
                        const numerics::RngState& rng) {
  eval::FitResult r;
  r.site_id = site.site_id;
  r.method = method;
  r.probabilities = config.quantiles.probabilities;
  const auto start = Clock::now();
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(config.timeout);
  try {
    const auto sample = empirical::SortedSample::from(site.values);
    for (double p : r.probabilities) r.empirical_quantiles.push_back(empirical::empirical_quantile(sample, p));

    std::vector<double> q;
    bool timed_out = false;
    if (const std::size_t k = eval::mixture_components(method); k > 0) {
      mixture::MapOptions opts;
      opts.restarts = config.mixture_restarts;
      opts.rng = rng;
      opts.deadline = deadline;
      const auto fit = mixture::fit_map(site.values, k, {}, opts);
      for (double p : r.probabilities) q.push_back(mixture::mixture_quantile(p, fit.params));
      r.params = {{"family", "gamma_mixture"},
                  {"weights", fit.params.weights},
                  {"shapes", fit.params.shapes},
                  {"scales", fit.params.scales}};
      r.diagnostics = diagnostics_json(fit.diagnostics);
      r.converged = fit.diagnostics.converged;
      timed_out = fit.diagnostics.timed_out;
    } else {
      egpd::FitOptions opts;
      opts.jitter_restarts = config.egpd_restarts;
      opts.rng = rng;
      opts.deadline = deadline;
      const egpd::CensoringSpec cens{config.threshold_mm};
      egpd::EgpdFit fit;
      switch (method) {
        case eval::MethodId::NaveauMle: fit = egpd::fit_mle(site.values, opts); break;
        case eval::MethodId::NaveauPwm: fit = egpd::fit_pwm(site.values, opts); break;
        case eval::MethodId::NaveauMleC: fit = egpd::fit_mle_censored(site.values, cens, opts); break;
        case eval::MethodId::NaveauPwmC: fit = egpd::fit_pwm_censored(site.values, cens, opts); break;
        default: throw std::logic_error("unhandled method");
      }
      for (double p : r.probabilities) q.push_back(egpd::egpd_quantile(p, fit.params));
      r.params = {{"family", "egpd"}, {"kappa", fit.params.kappa}, {"sigma", fit.params.sigma}, {"xi", fit.params.xi}};
      r.diagnostics = diagnostics_json(fit.diagnostics);
      r.converged = fit.diagnostics.converged;
      timed_out = fit.diagnostics.timed_out;
    }
    if (timed_out) r.converged = false;
    if (r.converged && !strictly_increasing_finite(q)) {
      r.converged = false;
      r.diagnostics["note"] = "estimated quantiles not strictly increasing";
    }
    r.estimated_quantiles = std::move(q);
  } catch (const std::exception& e) {
    r.converged = false;
    r.estimated_quantiles.clear();
    r.error = e.what();
    if (r.empirical_quantiles.size() != r.probabilities.size()) r.empirical_quantiles.clear();
  }
  r.fit_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::vector<eval::FitResult> fit_grid(std::span<const corpus::SiteSeries> sites, const RunConfig& config) {
  config.validate();
  const std::size_t nm = config.methods.size();
  const std::size_t total = sites.size() * nm;
  std::vector<eval::FitResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const std::size_t s = i / nm;
      const eval::MethodId m = config.methods[i % nm];
      results[i] = run_fit(sites[s], m, config, task_rng(config.seed, s, m));
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(config.jobs, std::max<std::size_t>(total, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

json to_json(const eval::FitResult& r) {
  json j;
  j["site_id"] = r.site_id;
  j["method"] = std::string(eval::method_key(r.method));
  j["converged"] = r.converged;
  j["probabilities"] = r.probabilities;
  j["estimated_quantiles"] = r.estimated_quantiles;
  j["empirical_quantiles"] = r.empirical_quantiles;
  j["params"] = r.params;
  j["diagnostics"] = r.diagnostics;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

eval::FitResult fit_result_from_json(const json& j) {
  try {
    eval::FitResult r;
    r.site_id = j.at("site_id").get<std::string>();
    const auto key = j.at("method").get<std::string>();
    const auto m = eval::parse_method(key);
    if (!m) throw ConfigError("unknown method '" + key + "' in fit record");
    r.method = *m;
    r.converged = j.at("converged").get<bool>();
    r.probabilities = j.at("probabilities").get<std::vector<double>>();
    r.estimated_quantiles = j.at("estimated_quantiles").get<std::vector<double>>();
    r.empirical_quantiles = j.at("empirical_quantiles").get<std::vector<double>>();
    r.params = j.value("params", json());
    r.diagnostics = j.value("diagnostics", json());
    r.error = j.value("error", std::string());
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid fit record: ") + e.what());
  }
}

std::string records_jsonl(std::span<const eval::FitResult> results) {
  std::string out;
  for (const auto& r : results) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<eval::FitResult> read_records(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open records file " + path.string());
  std::vector<eval::FitResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(fit_result_from_json(j));
  }
  return out;
}

BenchmarkOutcome run_benchmark(std::vector<corpus::SiteSeries> sites, const RunConfig& config,
                               const std::filesystem::path& out_dir) {
  config.validate();
  auto filtered = corpus::filter_corpus(std::move(sites), config.min_wet);
  if (filtered.retained.empty()) throw ConfigError("no site has at least " + std::to_string(config.min_wet) + " wet days");

  BenchmarkOutcome outcome;
  outcome.sites_used = filtered.retained.size();
  outcome.sites_excluded = filtered.excluded;
  outcome.results = fit_grid(filtered.retained, config);
  outcome.summary = eval::summarize(outcome.results, config.quantiles);

  std::filesystem::create_directories(out_dir);
  const auto records = out_dir / kRecordsFile;
  report::write_text_file(records, records_jsonl(outcome.results));
  std::string timings;
  for (const auto& r : outcome.results) {
    timings += json{{"site_id", r.site_id}, {"method", eval::method_key(r.method)}, {"fit_seconds", r.fit_seconds}}
                   .dump();
    timings += '\n';
  }
  const auto timings_path = out_dir / kTimingsFile;
  report::write_text_file(timings_path, timings);
  outcome.files = {records, timings_path};
  for (auto& p : report::write_bundle(outcome.summary, out_dir, config.svg)) outcome.files.push_back(std::move(p));
  return outcome;
}

}  // namespace rainfall::pipeline
