#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rainfall/corpus.hpp"
#include "rainfall/errors.hpp"
#include "rainfall/evaluation.hpp"
#include "rainfall/pipeline.hpp"
#include "rainfall/report.hpp"

namespace fs = std::filesystem;
using namespace rainfall;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAllFailed = 4;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::vector<eval::MethodId> parse_methods(const std::string& text) {
  std::vector<eval::MethodId> out;
  for (const auto& item : split_list(text)) {
    const auto m = eval::parse_method(item);
    if (!m) throw ConfigError("unknown method '" + item + "'");
    out.push_back(*m);
  }
  return out;
}

eval::QuantileSet parse_quantiles(const std::string& text) {
  eval::QuantileSet qs;
  qs.probabilities.clear();
  for (const auto& item : split_list(text)) {
    double p = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), p);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size())
      throw ConfigError("invalid quantile '" + item + "'");
    qs.probabilities.push_back(p);
  }
  qs.validate();
  return qs;
}

struct CorpusArgs {
  std::string manifest;
  std::string preset;
  std::uint64_t seed = 0;
};

void add_corpus_options(CLI::App* cmd, CorpusArgs& args) {
  auto* m = cmd->add_option("--manifest", args.manifest, "Corpus manifest (JSON)");
  auto* p = cmd->add_option("--preset", args.preset, "Named synthetic corpus instead of a manifest");
  m->excludes(p);
  cmd->add_option("--seed", args.seed, "Seed for fits (and for --preset corpora)");
}

corpus::Manifest corpus_manifest(const CorpusArgs& args) {
  if (!args.manifest.empty()) return corpus::load_manifest(args.manifest);
  if (args.preset.empty()) throw ConfigError("either --manifest or --preset is required");
  corpus::Manifest m;
  m.seed = args.seed;
  m.preset = args.preset;
  (void)corpus::preset(args.preset, args.seed);
  return m;
}

int cmd_fit(const std::string& site_path, const std::string& method_text, const pipeline::RunConfig& base,
            const std::string& out) {
  const auto method = eval::parse_method(method_text);
  if (!method) throw ConfigError("unknown method '" + method_text + "'");
  pipeline::RunConfig config = base;
  config.methods = {*method};
  config.validate();
  corpus::SiteSeries site;
  try {
    site = corpus::load_site(site_path);
  } catch (const DataError& e) {
    std::cerr << "rainbench: " << site_path << ": " << e.what() << '\n';
    return kExitIo;
  }
  const auto r = pipeline::run_fit(site, *method, config, pipeline::task_rng(config.seed, 0, *method));
  const std::string body = pipeline::to_json(r).dump(2) + "\n";
  if (out.empty()) {
    std::cout << body;
  } else {
    report::write_text_file(out, body);
  }
  if (!r.error.empty()) {
    std::cerr << "rainbench: fit failed: " << r.error << '\n';
    return kExitIo;
  }
  if (!r.converged) {
    std::cerr << "rainbench: fit did not converge\n";
    return kExitAllFailed;
  }
  return kExitOk;
}

int cmd_simulate(const CorpusArgs& args, const fs::path& out) {
  const auto manifest = corpus_manifest(args);
  const auto specs = corpus::manifest_generators(manifest);
  if (specs.empty()) throw ConfigError("manifest has no generators to simulate");
  fs::create_directories(out);
  nlohmann::json listing = {{"seed", manifest.seed}, {"sites", nlohmann::json::array()}};
  for (const auto& spec : specs) {
    if (spec.site_id.empty() || spec.site_id.find_first_of("/\\") != std::string::npos)
      throw ConfigError("site id '" + spec.site_id + "' is not usable as a file name");
    const auto site = corpus::simulate_site(spec);
    const std::string file = spec.site_id + ".csv";
    corpus::save_site(site, out / file);
    nlohmann::json truth = *site.truth;
    truth["n_wet"] = site.n_wet;
    report::write_text_file(out / (spec.site_id + ".truth.json"), truth.dump(2) + "\n");
    listing["sites"].push_back(file);
  }
  report::write_text_file(out / "corpus.json", listing.dump(2) + "\n");
  std::cerr << "rainbench: wrote " << specs.size() << " site files to " << out.string() << '\n';
  return kExitOk;
}

int cmd_benchmark(const CorpusArgs& args, const pipeline::RunConfig& config, const fs::path& out) {
  config.validate();
  const auto manifest = corpus_manifest(args);
  auto sites = corpus::materialize(manifest);
  const auto outcome = pipeline::run_benchmark(std::move(sites), config, out);
  std::size_t failed = 0;
  for (const auto& r : outcome.results)
    if (!r.error.empty() || !r.converged) ++failed;
  std::cerr << "rainbench: " << outcome.sites_used << " sites (" << outcome.sites_excluded
            << " excluded below " << config.min_wet << " wet days), " << outcome.results.size() << " fits, "
            << failed << " failed or non-converged\n";
  for (const auto& w : outcome.summary.warnings) std::cerr << "rainbench: warning: " << w << '\n';
  std::cout << report::median_table_text(outcome.summary);
  return failed == outcome.results.size() ? kExitAllFailed : kExitOk;
}

int cmd_report(const fs::path& records_path, const std::optional<std::vector<eval::MethodId>>& methods,
               const eval::QuantileSet& quantiles, const fs::path& out, bool svg) {
  auto records = pipeline::read_records(records_path);
  if (records.empty()) throw DataError("no fit records in " + records_path.string());
  const std::vector<eval::MethodId> wanted =
      methods ? *methods : std::vector<eval::MethodId>(eval::kAllMethods.begin(), eval::kAllMethods.end());
  std::vector<eval::FitResult> kept;
  for (auto& r : records)
    if (std::find(wanted.begin(), wanted.end(), r.method) != wanted.end()) kept.push_back(std::move(r));
  for (eval::MethodId m : wanted) {
    if (std::none_of(kept.begin(), kept.end(), [m](const eval::FitResult& r) { return r.method == m; }))
      std::cerr << "rainbench: warning: no records for " << eval::method_key(m) << "; row omitted\n";
  }
  if (kept.empty()) throw DataError("no records for the selected methods");
  const auto summary = eval::summarize(kept, quantiles);
  for (const auto& w : summary.warnings) std::cerr << "rainbench: warning: " << w << '\n';
  report::write_bundle(summary, out, svg);
  std::cout << report::median_table_text(summary);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rainfall distribution estimators and quantile benchmark"};
  app.require_subcommand(1);

  pipeline::RunConfig config;
  std::string methods_text, quantiles_text, out, site, method;
  double timeout_s = 60.0;
  CorpusArgs corpus_args;

  auto add_fit_options = [&](CLI::App* cmd) {
    cmd->add_option("--quantiles", quantiles_text, "Comma-separated probabilities");
    cmd->add_option("--threshold-mm", config.threshold_mm, "Censoring threshold in mm")->capture_default_str();
    cmd->add_option("--egpd-restarts", config.egpd_restarts, "Jittered EGPD restarts")->capture_default_str();
    cmd->add_option("--mixture-restarts", config.mixture_restarts, "Gamma mixture restarts")->capture_default_str();
    cmd->add_option("--timeout", timeout_s, "Per-fit timeout in seconds")->capture_default_str();
  };

  auto* fit = app.add_subcommand("fit", "Fit one method to one site file");
  fit->add_option("--site", site, "Site CSV file")->required();
  fit->add_option("--method", method, "Method key or label")->required();
  fit->add_option("--seed", config.seed, "Seed for restarts");
  fit->add_option("--out", out, "Write the JSON record here instead of stdout");
  add_fit_options(fit);

  auto* simulate = app.add_subcommand("simulate", "Write synthetic site files");
  add_corpus_options(simulate, corpus_args);
  simulate->add_option("--out", out, "Output directory")->required();

  auto* bench = app.add_subcommand("benchmark", "Fit every (site, method) pair and write tables");
  add_corpus_options(bench, corpus_args);
  bench->add_option("--methods", methods_text, "Comma-separated methods (default all)");
  bench->add_option("--jobs", config.jobs, "Worker threads")->capture_default_str();
  bench->add_option("--min-wet", config.min_wet, "Minimum wet days per site")->capture_default_str();
  bench->add_option("--out", out, "Output directory")->required();
  bench->add_flag("--svg", config.svg, "Also write boxplot SVGs");
  add_fit_options(bench);

  std::string records;
  bool report_svg = false;
  auto* rep = app.add_subcommand("report", "Rebuild tables from fit records");
  rep->add_option("--records", records, "fits.jsonl from a benchmark run")->required();
  rep->add_option("--methods", methods_text, "Comma-separated methods (default all)");
  rep->add_option("--quantiles", quantiles_text, "Comma-separated probabilities");
  rep->add_option("--out", out, "Output directory")->required();
  rep->add_flag("--svg", report_svg, "Also write boxplot SVGs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (!quantiles_text.empty()) config.quantiles = parse_quantiles(quantiles_text);
    config.timeout = std::chrono::duration<double>(timeout_s);
    std::optional<std::vector<eval::MethodId>> methods;
    if (!methods_text.empty()) methods = parse_methods(methods_text);

    if (fit->parsed()) return cmd_fit(site, method, config, out);
    if (simulate->parsed()) return cmd_simulate(corpus_args, out);
    if (bench->parsed()) {
      if (methods) config.methods = *methods;
      return cmd_benchmark(corpus_args, config, out);
    }
    if (rep->parsed()) return cmd_report(records, methods, config.quantiles, out, report_svg);
  } catch (const ConfigError& e) {
    std::cerr << "rainbench: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "rainbench: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "rainbench: " << e.what() << '\n';
    return kExitIo;
  }
  return kExitConfig;
}
