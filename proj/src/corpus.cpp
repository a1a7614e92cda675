#include "rainfall/corpus.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "rainfall/errors.hpp"
#include "rainfall/report.hpp"

namespace rainfall::corpus {
namespace {

constexpr std::string_view kHeader = "date,rainfall_mm";

bool valid_iso_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  int y = 0;
  unsigned m = 0, d = 0;
  auto digits = [](std::string_view part, auto& out) {
    for (char c : part)
      if (c < '0' || c > '9') return false;
    return std::from_chars(part.data(), part.data() + part.size(), out).ec == std::errc{};
  };
  if (!digits(s.substr(0, 4), y) || !digits(s.substr(5, 2), m) || !digits(s.substr(8, 2), d)) return false;
  return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::string iso_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

std::string shortest(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double log_uniform(numerics::RngState& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.uniform() * (std::log(hi) - std::log(lo)));
}

double uniform(numerics::RngState& rng, double lo, double hi) { return lo + rng.uniform() * (hi - lo); }

egpd::EgpdParams draw_egpd(numerics::RngState& rng, double kappa_hi) {
  egpd::EgpdParams p;
  p.kappa = uniform(rng, 0.6, kappa_hi);
  p.sigma = log_uniform(rng, 2.0, 10.0);
  p.xi = uniform(rng, 0.02, 0.3);
  return p;
}

mixture::GammaMixtureParams draw_mixture(numerics::RngState& rng) {
  mixture::GammaMixtureParams p;
  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    p.weights.push_back(uniform(rng, 0.2, 1.0));
    total += p.weights.back();
  }
  for (double& w : p.weights) w /= total;
  p.shapes = {uniform(rng, 0.4, 0.9), uniform(rng, 1.2, 3.0), uniform(rng, 3.0, 8.0)};
  p.scales = {log_uniform(rng, 0.3, 1.5), log_uniform(rng, 1.0, 4.0), log_uniform(rng, 2.0, 6.0)};
  return p;
}

}  // namespace

SiteSeries parse_site_csv(std::istream& in, const std::string& site_id) {
  SiteSeries s;
  s.site_id = site_id;
  s.source = SeriesSource::Ingested;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!header_seen) {
      if (line != kHeader) throw MalformedRowError(line_no, "expected header 'date,rainfall_mm'");
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw MalformedRowError(line_no, "expected two comma-separated fields");
    const std::string_view date(line.data(), comma);
    const std::string_view field(line.data() + comma + 1, line.size() - comma - 1);
    if (!valid_iso_date(date)) throw MalformedRowError(line_no, "invalid date '" + std::string(date) + "'");
    if (field.empty()) continue;  // missing
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size() || !std::isfinite(v))
      throw MalformedRowError(line_no, "invalid rainfall value '" + std::string(field) + "'");
    if (v < 0.0) throw MalformedRowError(line_no, "negative rainfall value");
    if (v > 0.0) s.values.push_back(v);
  }
  if (!header_seen) throw DataError("site " + site_id + ": empty file");
  if (s.values.empty()) throw DataError("site " + site_id + ": no wet days");
  s.n_wet = s.values.size();
  return s;
}

SiteSeries load_site(const std::filesystem::path& path, std::optional<std::string> site_id) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return parse_site_csv(f, site_id.value_or(path.stem().string()));
}

std::string site_csv(const SiteSeries& series) {
  std::string out(kHeader);
  out += '\n';
  std::chrono::sys_days day = std::chrono::sys_days{std::chrono::year{1900} / 1 / 1};
  for (double v : series.values) {
    out += iso_date(day);
    out += ',';
    out += shortest(v);
    out += '\n';
    day += std::chrono::days{1};
  }
  return out;
}

void save_site(const SiteSeries& series, const std::filesystem::path& path) {
  report::write_text_file(path, site_csv(series));
}

FilterResult filter_corpus(std::vector<SiteSeries> sites, std::size_t min_wet) {
  FilterResult r;
  for (auto& s : sites) {
    if (s.n_wet >= min_wet) {
      r.retained.push_back(std::move(s));
    } else {
      ++r.excluded;
    }
  }
  return r;
}

double discretize(double value, double increment) {
  if (!(increment > 0.0)) throw DomainError("discretize: increment must be positive");
  const double k = std::nearbyint(value / increment);
  double scale = 1.0;
  for (int d = 0; d <= 9; ++d, scale *= 10.0) {
    const double m = increment * scale;
    if (std::fabs(m - std::round(m)) < 1e-9 * scale) return k * std::round(m) / scale;
  }
  return k * increment;
}

SiteSeries simulate_site(const GeneratorSpec& spec) {
  if (spec.n == 0) throw DomainError("generator " + spec.site_id + ": n must be positive");
  numerics::RngState rng(spec.seed, 0);
  SiteSeries s;
  s.site_id = spec.site_id;
  s.source = SeriesSource::Synthetic;
  s.values = spec.family() == Family::Egpd ? egpd::egpd_simulate(spec.n, std::get<0>(spec.params), rng)
                                           : mixture::mixture_simulate(spec.n, std::get<1>(spec.params), rng);
  if (spec.discretize_mm) {
    std::vector<double> kept;
    kept.reserve(s.values.size());
    for (double v : s.values) {
      const double r = discretize(v, *spec.discretize_mm);
      if (r > 0.0) kept.push_back(r);
    }
    s.values = std::move(kept);
  }
  s.n_wet = s.values.size();
  s.truth = to_json(spec);
  return s;
}

std::vector<SiteSeries> simulate_corpus(std::span<const GeneratorSpec> specs) {
  std::vector<SiteSeries> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) out.push_back(simulate_site(spec));
  return out;
}

nlohmann::json to_json(const GeneratorSpec& spec) {
  nlohmann::json j;
  j["site_id"] = spec.site_id;
  if (spec.family() == Family::Egpd) {
    const auto& p = std::get<0>(spec.params);
    j["family"] = "egpd";
    j["params"] = {{"kappa", p.kappa}, {"sigma", p.sigma}, {"xi", p.xi}};
  } else {
    const auto& p = std::get<1>(spec.params);
    j["family"] = "gamma_mixture";
    j["params"] = {{"weights", p.weights}, {"shapes", p.shapes}, {"scales", p.scales}};
  }
  j["n"] = spec.n;
  j["discretize_mm"] = spec.discretize_mm ? nlohmann::json(*spec.discretize_mm) : nlohmann::json(nullptr);
  j["seed"] = spec.seed;
  return j;
}

GeneratorSpec generator_from_json(const nlohmann::json& j) {
  try {
    GeneratorSpec s;
    s.site_id = j.at("site_id").get<std::string>();
    const std::string family = j.at("family").get<std::string>();
    const auto& p = j.at("params");
    if (family == "egpd") {
      egpd::EgpdParams e{p.at("kappa").get<double>(), p.at("sigma").get<double>(), p.at("xi").get<double>()};
      egpd::validate(e);
      s.params = e;
    } else if (family == "gamma_mixture") {
      mixture::GammaMixtureParams g{p.at("weights").get<std::vector<double>>(), p.at("shapes").get<std::vector<double>>(),
                                    p.at("scales").get<std::vector<double>>()};
      mixture::validate(g);
      s.params = std::move(g);
    } else {
      throw ConfigError("unknown generator family '" + family + "'");
    }
    s.n = j.at("n").get<std::size_t>();
    if (s.n == 0) throw ConfigError("generator " + s.site_id + ": n must be positive");
    if (j.contains("discretize_mm") && !j["discretize_mm"].is_null()) {
      s.discretize_mm = j["discretize_mm"].get<double>();
      if (!(*s.discretize_mm > 0.0)) throw ConfigError("generator " + s.site_id + ": discretize_mm must be positive");
    }
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid generator spec: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid generator parameters: ") + e.what());
  }
}

std::vector<std::string> preset_names() {
  return {"paper-like-50", "egpd-50", "mixture-50", "egpd-discretized-50"};
}

std::vector<GeneratorSpec> preset(const std::string& name, std::uint64_t seed) {
  constexpr std::size_t kSites = 50;
  std::vector<GeneratorSpec> specs;
  for (std::size_t i = 0; i < kSites; ++i) {
    numerics::RngState draw(seed, 1000 + i);
    GeneratorSpec s;
    char id[32];
    std::snprintf(id, sizeof id, "site%03zu", i + 1);
    s.site_id = id;
    s.seed = numerics::RngState(seed, i).next_u64();
    if (name == "paper-like-50") {
      s.n = static_cast<std::size_t>(std::lround(log_uniform(draw, 400.0, 1200.0)));
      if (i % 2 == 0) {
        s.params = draw_egpd(draw, 1.5);
      } else {
        s.params = draw_mixture(draw);
      }
      s.discretize_mm = i % 3 == 0 ? 0.1 : 0.2;
    } else if (name == "egpd-50") {
      s.n = static_cast<std::size_t>(std::lround(log_uniform(draw, 300.0, 2000.0)));
      s.params = draw_egpd(draw, 1.5);
    } else if (name == "mixture-50") {
      s.n = static_cast<std::size_t>(std::lround(log_uniform(draw, 300.0, 2000.0)));
      s.params = draw_mixture(draw);
    } else if (name == "egpd-discretized-50") {
      s.n = static_cast<std::size_t>(std::lround(log_uniform(draw, 300.0, 2000.0)));
      s.params = draw_egpd(draw, 1.2);
      s.discretize_mm = 0.2;
    } else {
      throw ConfigError("unknown preset '" + name + "'");
    }
    specs.push_back(std::move(s));
  }
  return specs;
}

Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
  Manifest m;
  try {
    m.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("preset")) m.preset = j.at("preset").get<std::string>();
    if (j.contains("sites")) {
      for (const auto& p : j.at("sites")) {
        std::filesystem::path path = p.get<std::string>();
        m.site_files.push_back(path.is_absolute() ? path : base_dir / path);
      }
    }
    if (j.contains("generators")) {
      for (const auto& g : j.at("generators")) m.generators.push_back(generator_from_json(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid manifest: ") + e.what());
  }
  if (m.preset) (void)preset(*m.preset, m.seed);  // validates the name
  if (!m.preset && m.site_files.empty() && m.generators.empty())
    throw ConfigError("manifest lists no preset, sites or generators");
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return parse_manifest(j, path.parent_path());
}

std::vector<GeneratorSpec> manifest_generators(const Manifest& m) {
  std::vector<GeneratorSpec> out;
  if (m.preset) out = preset(*m.preset, m.seed);
  out.insert(out.end(), m.generators.begin(), m.generators.end());
  return out;
}

std::vector<SiteSeries> materialize(const Manifest& m) {
  const auto gens = manifest_generators(m);
  std::vector<SiteSeries> sites = simulate_corpus(gens);
  for (const auto& path : m.site_files) sites.push_back(load_site(path));
  return sites;
}

}  // namespace rainfall::corpus
