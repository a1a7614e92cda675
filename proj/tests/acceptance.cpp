// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Progress and measured values go to stderr.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rainfall/corpus.hpp"
#include "rainfall/egpd.hpp"
#include "rainfall/empirical.hpp"
#include "rainfall/evaluation.hpp"
#include "rainfall/gamma_mixture.hpp"
#include "rainfall/numerics/quadrature.hpp"
#include "rainfall/pipeline.hpp"

using namespace rainfall;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;
const double kProbs[] = {0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99};
constexpr std::uint64_t kCorpusSeed = 1;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> log_ratios(const std::function<double(double)>& quantile, std::span<const double> data) {
  const auto s = empirical::SortedSample::from(data);
  std::vector<double> d;
  for (double p : kProbs) d.push_back(eval::log_ratio_metric(quantile(p), empirical::empirical_quantile(s, p)));
  return d;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

std::string join(std::span<const double> v) {
  std::string s;
  for (double x : v) s += fmt("%s%.4f", s.empty() ? "" : " ", x);
  return s;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_command(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ∫ density over (0, ∞): substitution y = t^m below the 1e-6 quantile so
// that shapes below 1 give a bounded integrand, then plain panels between
// quantile breakpoints. The mass beyond Q(1 − 1e-13) is ignored.
double mixture_mass(const mixture::GammaMixtureParams& p) {
  const double a_min = *std::min_element(p.shapes.begin(), p.shapes.end());
  const double m = std::clamp(std::ceil(1.0 / a_min), 2.0, 64.0);
  auto f = [&](double y) { return y > 0.0 ? std::exp(mixture::mixture_log_pdf(y, p)) : 0.0; };
  const double y0 = mixture::mixture_quantile(1e-6, p);
  double total = numerics::gauss_legendre_integrate(
      [&](double t) { return t > 0.0 ? f(std::pow(t, m)) * m * std::pow(t, m - 1.0) : 0.0; }, 0.0,
      std::pow(y0, 1.0 / m), 1000);
  const double breaks[] = {1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.999, 1 - 1e-5, 1 - 1e-7, 1 - 1e-10, 1 - 1e-13};
  for (std::size_t i = 1; i < std::size(breaks); ++i)
    total += numerics::gauss_legendre_integrate(f, mixture::mixture_quantile(breaks[i - 1], p),
                                                mixture::mixture_quantile(breaks[i], p), 1000);
  return total;
}

// Fitted mixtures gathered from criteria 6 and 10 for criterion 7.
std::vector<mixture::GammaMixtureParams> g_fitted_mixtures;

Outcome egpd_roundtrip() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double k : {0.5, 1.0, 2.0})
    for (double s : {0.5, 5.0})
      for (double xi : {-0.2, 0.0, 0.3})
        for (int i = 1; i <= 999; ++i) {
          const double p = i / 1000.0;
          const egpd::EgpdParams par{k, s, xi};
          worst = std::max(worst, std::fabs(egpd::egpd_cdf(egpd::egpd_quantile(p, par), par) - p));
        }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 1.0, fmt("max error %.3g, %.3f s", worst, secs)};
}

Outcome pwm_closed_form() {
  double worst = 0.0;
  for (int j = 0; j <= 2; ++j)
    for (double k : {0.5, 1.0, 2.0})
      for (double xi : {-0.2, 0.1, 0.5}) {
        const egpd::EgpdParams par{k, 1.0, xi};
        auto integrand = [&](double s) {
          const double u = 1.0 - s * s * s * s;
          if (u <= 0.0 || u >= 1.0) return 0.0;
          return egpd::egpd_quantile(u, par) * std::pow(u, j) * 4.0 * s * s * s;
        };
        const double quad = numerics::gauss_legendre_integrate(integrand, 0.0, 1.0, 400);
        worst = std::max(worst, std::fabs(egpd::theoretical_pwm(j, par) / quad - 1.0));
      }
  double gp = 0.0;
  for (double sigma : {0.5, 1.0, 5.0})
    for (double xi : {-0.2, 0.0, 0.1, 0.5})
      gp = std::max(gp, std::fabs(egpd::theoretical_pwm(0, {1.0, sigma, xi}) - sigma / (1.0 - xi)));
  return {worst <= 1e-6 && gp <= 1e-10, fmt("max relative error %.3g, GP mean error %.3g", worst, gp)};
}

Outcome mle_recovery() {
  numerics::RngState r(7, 0);
  const auto v = egpd::egpd_simulate(20000, {2.0, 5.0, 0.2}, r);
  const auto t0 = Clock::now();
  const auto fit = egpd::fit_mle(v);
  const double secs = seconds_since(t0);
  const auto d = log_ratios([&](double p) { return egpd::egpd_quantile(p, fit.params); }, v);
  return {fit.diagnostics.converged && max_abs(d) <= 0.02 && secs < 10.0,
          fmt("D = [%s], %.2f s", join(d).c_str(), secs)};
}

Outcome pwm_recovery() {
  numerics::RngState r(7, 0);
  const auto v = egpd::egpd_simulate(50000, {2.0, 5.0, 0.2}, r);
  const auto fit = egpd::fit_pwm(v);
  const auto d = log_ratios([&](double p) { return egpd::egpd_quantile(p, fit.params); }, v);
  return {fit.diagnostics.converged && max_abs(d) <= 0.05, fmt("D = [%s]", join(d).c_str())};
}

Outcome censoring() {
  numerics::RngState r(7, 0);
  const auto raw = egpd::egpd_simulate(20000, {2.0, 5.0, 0.2}, r);
  const double lo = *std::min_element(raw.begin(), raw.end());
  const auto plain = egpd::fit_mle(raw);
  const auto cens = egpd::fit_mle_censored(raw, {0.5 * lo});
  const bool identical = plain.params == cens.params && plain.diagnostics.objective == cens.diagnostics.objective;

  std::vector<double> v;
  for (double x : raw)
    if (const double y = corpus::discretize(x, 0.2); y > 0.0) v.push_back(y);
  const auto s = empirical::SortedSample::from(v);
  const double q99 = empirical::empirical_quantile(s, 0.99);
  const auto mlec = egpd::fit_mle_censored(v, {1.0});
  const auto pwmc = egpd::fit_pwm_censored(v, {1.0});
  const double d_mle = eval::log_ratio_metric(egpd::egpd_quantile(0.99, mlec.params), q99);
  const double d_pwm = eval::log_ratio_metric(egpd::egpd_quantile(0.99, pwmc.params), q99);
  const bool ok = identical && mlec.diagnostics.converged && pwmc.diagnostics.converged && std::fabs(d_mle) <= 0.05 &&
                  std::fabs(d_pwm) <= 0.05;
  return {ok, fmt("bit-identical %s; discretized D^0.99 MLE-c %.4f, PWM-c %.4f", identical ? "yes" : "no", d_mle, d_pwm)};
}

Outcome mixture_recovery() {
  const mixture::GammaMixtureParams truth{{0.3, 0.5, 0.2}, {0.5, 2.0, 8.0}, {0.5, 2.0, 5.0}};
  numerics::RngState r(7, 0);
  const auto y = mixture::mixture_simulate(20000, truth, r);
  const auto t0 = Clock::now();
  const auto fit = mixture::fit_map(y, 3);
  const double secs = seconds_since(t0);
  g_fitted_mixtures.push_back(fit.params);
  const auto d = log_ratios([&](double p) { return mixture::mixture_quantile(p, fit.params); }, y);
  return {fit.diagnostics.converged && max_abs(d) <= 0.05 && secs < 60.0,
          fmt("D = [%s], %.1f s", join(d).c_str(), secs)};
}

Outcome mixture_normalization() {
  if (g_fitted_mixtures.empty()) return {false, "no fitted mixtures"};
  double mass_err = 0.0, rt_err = 0.0;
  for (const auto& p : g_fitted_mixtures) {
    mass_err = std::max(mass_err, std::fabs(mixture_mass(p) - 1.0));
    for (int i = 1; i <= 999; ++i) {
      const double u = i / 1000.0;
      rt_err = std::max(rt_err, std::fabs(mixture::mixture_cdf(mixture::mixture_quantile(u, p), p) - u));
    }
  }
  return {mass_err <= 1e-6 && rt_err <= 1e-8,
          fmt("%zu fitted mixtures, max |mass − 1| %.3g, max roundtrip error %.3g", g_fitted_mixtures.size(), mass_err,
              rt_err)};
}

Outcome metric_and_classify() {
  using eval::Classification;
  bool ok = eval::log_ratio_metric(3.7, 3.7) == 0.0;
  for (double q : {0.2, 1.0, 55.0}) {
    ok = ok && std::fabs(eval::log_ratio_metric(2 * q, q) - std::numbers::ln2) <= 1e-15;
    ok = ok && std::fabs(eval::log_ratio_metric(q, 2 * q) + std::numbers::ln2) <= 1e-15;
    ok = ok && std::fabs(eval::log_ratio_metric(std::numbers::e * q, q) - 1.0) <= 1e-15;
  }
  auto cls = [](std::vector<double> v) { return eval::classify(v); };
  ok = ok && cls({-0.3, -0.2, -0.1, -0.05, -0.01}) == Classification::Under;
  ok = ok && cls({0.01, 0.05, 0.1, 0.2, 0.3}) == Classification::Over;
  ok = ok && cls({-1, -0.5, 0.5, 1}) == Classification::Nominal;
  ok = ok && cls({-3, -2, -1, 0, 0}) == Classification::Nominal;  // Q3 = 0
  ok = ok && cls({0, 0, 1, 2, 3}) == Classification::Nominal;     // Q1 = 0
  ok = ok && cls({-3, -2, -1, -1e-12, 0}) == Classification::Under;
  ok = ok && eval::classify_quartiles(0.0, 0.0) == Classification::Nominal;
  return {ok, "identities and constructed vectors"};
}

Outcome pipeline_determinism() {
  const fs::path work = fs::temp_directory_path() / "rainfall_acceptance_jobs";
  fs::remove_all(work);
  const std::string exe = RAINBENCH_EXE;
  std::string detail;
  for (int jobs : {1, 8}) {
    const auto t0 = Clock::now();
    const int rc = run_command(exe + " benchmark --preset paper-like-50 --seed " + std::to_string(kCorpusSeed) +
                               " --jobs " + std::to_string(jobs) + " --out " + (work / std::to_string(jobs)).string() +
                               " >/dev/null 2>&1");
    detail += fmt("jobs %d: exit %d, %.0f s; ", jobs, rc, seconds_since(t0));
    if (rc != 0) return {false, detail};
  }
  std::size_t compared = 0;
  for (const auto& e : fs::directory_iterator(work / "1")) {
    if (e.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(e.path()) != slurp(work / "8" / e.path().filename()))
      return {false, detail + "differs: " + e.path().filename().string()};
  }
  fs::remove_all(work);
  return {compared >= 3, detail + fmt("%zu CSV files identical", compared)};
}

std::vector<eval::FitResult> fit_preset(const std::string& name, std::vector<eval::MethodId> methods) {
  const auto specs = corpus::preset(name, kCorpusSeed);
  const auto sites = corpus::filter_corpus(corpus::simulate_corpus(specs)).retained;
  pipeline::RunConfig config;
  config.methods = std::move(methods);
  config.seed = kCorpusSeed;
  return pipeline::fit_grid(sites, config);
}

Outcome corpus_self_consistency() {
  using eval::MethodId;
  const eval::QuantileSet qs;
  const std::size_t mid = 3;  // p = 0.5
  std::string detail;
  bool ok = true;

  const auto mix = fit_preset("mixture-50", {MethodId::GammaMixture3, MethodId::GammaMixture4});
  for (const auto& r : mix)
    if (r.converged)
      g_fitted_mixtures.push_back({r.params.at("weights").get<std::vector<double>>(),
                                   r.params.at("shapes").get<std::vector<double>>(),
                                   r.params.at("scales").get<std::vector<double>>()});
  const auto ms = eval::summarize(mix, qs);
  for (auto m : {MethodId::GammaMixture3, MethodId::GammaMixture4}) {
    const auto& c = ms.at(m, mid);
    const double med = c.stats ? c.stats->median : NAN;
    const char cls = c.cls ? eval::classification_code(*c.cls) : '-';
    ok = ok && c.stats && std::fabs(med) <= 0.05 && cls == 'N';
    detail += fmt("%s median D^0.5 %.4f class %c (%zu sites); ", std::string(eval::method_key(m)).c_str(), med, cls,
                  c.n_sites);
  }

  const auto eg = eval::summarize(fit_preset("egpd-50", {MethodId::NaveauMle}), qs);
  const auto& c = eg.at(MethodId::NaveauMle, mid);
  const double med = c.stats ? c.stats->median : NAN;
  ok = ok && c.stats && std::fabs(med) <= 0.05;
  detail += fmt("NaveauMle median D^0.5 %.4f (%zu sites)", med, c.n_sites);
  return {ok, detail};
}

Outcome discretization_experiment() {
  const auto results = fit_preset("egpd-discretized-50", {eval::kAllMethods.begin(), eval::kAllMethods.end()});
  const auto s = eval::summarize(results, eval::QuantileSet{});
  bool ok = true;
  std::string detail = "median D^0.01:";
  for (auto m : s.methods) {
    const auto& c = s.at(m, 0);
    const double med = c.stats ? c.stats->median : NAN;
    ok = ok && c.stats && med < 0.0;
    detail += fmt(" %s %.4f (%zu/%zu);", std::string(eval::method_key(m)).c_str(), med, c.n_sites,
                  c.n_sites + c.n_failed + c.n_excluded);
  }
  return {ok && s.methods.size() == eval::kAllMethods.size(), detail};
}

Outcome unit_oracles() {
  const fs::path report = fs::temp_directory_path() / "rainfall_acceptance_gtest.json";
  int total = 0;
  std::vector<std::string> failed;
  for (const std::string exe : {UNIT_TESTS_EXE, PIPELINE_TESTS_EXE, CLI_TESTS_EXE}) {
    fs::remove(report);
    run_command(exe + " --gtest_output=json:" + report.string() + " >/dev/null 2>&1");
    if (!fs::exists(report)) return {false, "no report from " + exe};
    const auto j = nlohmann::json::parse(slurp(report));
    for (const auto& suite : j.at("testsuites"))
      for (const auto& t : suite.at("testsuite")) {
        ++total;
        if (t.contains("failures")) failed.push_back(suite.at("name").get<std::string>() + "." + t.at("name").get<std::string>());
      }
  }
  fs::remove(report);
  std::string detail = fmt("%d tests, %zu failed", total, failed.size());
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty() && total > 0, detail};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  // Criterion 7 uses mixtures fitted by 6 and 10, so it runs after them.
  const Criterion order[] = {
      {1, "EGPD roundtrip", egpd_roundtrip},
      {2, "PWM closed form", pwm_closed_form},
      {3, "MLE recovery", mle_recovery},
      {4, "PWM recovery", pwm_recovery},
      {5, "Censoring correctness", censoring},
      {6, "Mixture recovery", mixture_recovery},
      {8, "Metric and classification", metric_and_classify},
      {10, "Corpus self-consistency", corpus_self_consistency},
      {7, "Mixture normalization", mixture_normalization},
      {11, "Discretization underestimates D^0.01", discretization_experiment},
      {9, "Pipeline determinism", pipeline_determinism},
      {12, "Unit oracles", unit_oracles},
  };
  std::vector<std::pair<const Criterion*, Outcome>> done;
  for (const auto& c : order) {
    std::cerr << "[" << c.id << "] " << c.name << " ..." << std::endl;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cerr << "    " << o.detail << std::endl;
    done.emplace_back(&c, std::move(o));
  }
  std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.first->id < b.first->id; });
  int failures = 0;
  for (const auto& [c, o] : done) {
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << c->id << " " << c->name << ": " << o.detail << "\n";
  }
  std::cout << (done.size() - failures) << "/" << done.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
