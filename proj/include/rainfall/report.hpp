#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rainfall/evaluation.hpp"

namespace rainfall::report {

/// Median D per (method, p) in natural log units, plus per-method counts.
std::string median_table_csv(const eval::EvaluationSummary& summary);
/// Median D ×10³ with one decimal; the smallest magnitude per column is
/// marked with '*'.
std::string median_table_text(const eval::EvaluationSummary& summary);
/// U/O/N per (method, p); "NA" when a cell has no data.
std::string classification_csv(const eval::EvaluationSummary& summary);
std::string classification_text(const eval::EvaluationSummary& summary);
/// Long format: one row per (method, p) with Tukey boxplot statistics.
std::string boxplot_csv(const eval::EvaluationSummary& summary);
/// Boxplots of D for the given probability indices, one panel per p, on
/// the asinh(8x) scale with a dashed line at 0.
std::string boxplot_svg(const eval::EvaluationSummary& summary, const std::vector<std::size_t>& p_indices,
                        const std::string& title);

/// Files written by write_bundle, relative to the output directory.
inline constexpr const char* kMedianCsv = "median_table.csv";
inline constexpr const char* kMedianText = "median_table.txt";
inline constexpr const char* kClassCsv = "classification.csv";
inline constexpr const char* kClassText = "classification.txt";
inline constexpr const char* kBoxplotCsv = "boxplot_stats.csv";

/// Writes all tables and, if `svg`, boxplots_{low,moderate,heavy}.svg
/// grouping p < 0.2, 0.2 <= p <= 0.8 and p > 0.8. Returns written paths.
std::vector<std::filesystem::path> write_bundle(const eval::EvaluationSummary& summary,
                                                const std::filesystem::path& dir, bool svg);

/// Writes `content` to `path`, throwing std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace rainfall::report
