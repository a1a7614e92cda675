#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rainfall/egpd.hpp"
#include "rainfall/gamma_mixture.hpp"

namespace rainfall::corpus {

enum class SeriesSource { Ingested, Synthetic };

/// One site's wet-day (strictly positive) rainfall values in mm.
struct SiteSeries {
  std::string site_id;
  std::vector<double> values;
  std::size_t n_wet = 0;
  SeriesSource source = SeriesSource::Ingested;
  /// Generator description for synthetic sites.
  std::optional<nlohmann::json> truth;
};

inline constexpr std::size_t kDefaultMinWet = 100;

/// Parses the site CSV schema: header `date,rainfall_mm`, then rows
/// `YYYY-MM-DD,<decimal or empty>`, LF or CRLF. Empty fields and zeros are
/// dropped. Throws MalformedRowError (with line number) on bad rows or
/// negative values and DataError if no wet days remain.
SiteSeries parse_site_csv(std::istream& in, const std::string& site_id);
/// parse_site_csv on a file; site_id defaults to the file stem.
SiteSeries load_site(const std::filesystem::path& path, std::optional<std::string> site_id = std::nullopt);

/// Writes `values` one per day starting 1900-01-01 using shortest
/// round-trip decimals, so load_site(save_site(s)) reproduces the values.
void save_site(const SiteSeries& series, const std::filesystem::path& path);
std::string site_csv(const SiteSeries& series);

struct FilterResult {
  std::vector<SiteSeries> retained;
  std::size_t excluded = 0;
};

/// Keeps sites with n_wet >= min_wet.
FilterResult filter_corpus(std::vector<SiteSeries> sites, std::size_t min_wet = kDefaultMinWet);

enum class Family { Egpd, GammaMixture };

struct GeneratorSpec {
  std::string site_id;
  std::variant<egpd::EgpdParams, mixture::GammaMixtureParams> params;
  std::size_t n = 0;
  /// Rounding increment in mm (round half to even); zeros are dropped.
  std::optional<double> discretize_mm;
  std::uint64_t seed = 0;

  Family family() const { return params.index() == 0 ? Family::Egpd : Family::GammaMixture; }
};

/// Rounds to the nearest multiple of `increment` (ties to even multiple),
/// producing the double nearest to the exact decimal multiple.
double discretize(double value, double increment);

SiteSeries simulate_site(const GeneratorSpec& spec);
std::vector<SiteSeries> simulate_corpus(std::span<const GeneratorSpec> specs);

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_from_json(const nlohmann::json& j);

/// Named synthetic corpora: "paper-like-50" (mixed families, 0.1/0.2 mm
/// gauges), "egpd-50", "mixture-50" and "egpd-discretized-50". Parameters
/// are drawn from `seed`; they are illustrative, not calibrated to any
/// observed network.
std::vector<GeneratorSpec> preset(const std::string& name, std::uint64_t seed);
std::vector<std::string> preset_names();

/// Corpus manifest (JSON): {"seed": u64, "preset": name?, "sites": [csv paths
/// relative to the manifest]?, "generators": [spec objects]?}.
struct Manifest {
  std::uint64_t seed = 0;
  std::optional<std::string> preset;
  std::vector<std::filesystem::path> site_files;
  std::vector<GeneratorSpec> generators;
};

Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);
Manifest load_manifest(const std::filesystem::path& path);

/// All generator specs of a manifest (preset expanded first).
std::vector<GeneratorSpec> manifest_generators(const Manifest& m);
/// Loads site files and simulates generators, in manifest order.
std::vector<SiteSeries> materialize(const Manifest& m);

}  // namespace rainfall::corpus
