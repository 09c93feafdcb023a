#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "epitome/epitome.hpp"

namespace epitome {

struct CategoryStats {
  std::string category;
  std::size_t n = 0;  // epitomizable sketches only
  double median = 0.0;
  double standard_error = 0.0;  // sample standard deviation / sqrt(n); 0 when n = 1
  double bar_low = 0.0;  // median - stderr, clamped to [0, 1]
  double bar_high = 0.0;
};

struct ExceedanceCurve {
  std::string category;
  std::vector<double> thresholds;
  std::vector<double> fractions;  // |{score > t}| / n
};

struct HeadlineFraction {
  double cutoff = 0.0;
  std::size_t below = 0;  // categories with median strictly below cutoff
  std::size_t total = 0;

  double fraction() const { return total ? static_cast<double>(below) / static_cast<double>(total) : 0.0; }
};

/// Median of the values (mean of the middle pair for even counts).
double median_of(std::vector<double> values);

/// Per-category statistics over epitomizable results, categories sorted by
/// name. Throws DataError("no epitomizable results") when there are none.
std::vector<CategoryStats> category_stats(std::span<const EpitomeResult> results);

/// Thresholds must be ascending and within [0, 1].
std::vector<ExceedanceCurve> exceedance_curves(std::span<const EpitomeResult> results,
                                               std::span<const double> thresholds);

std::vector<HeadlineFraction> headline_fractions(std::span<const CategoryStats> stats, std::span<const double> cutoffs);

/// `lo:hi:step` inclusive of hi (within rounding), or a comma-separated list.
std::vector<double> parse_number_list(const std::string& text);

std::string category_stats_csv(std::span<const CategoryStats> stats);
std::string exceedance_csv(std::span<const ExceedanceCurve> curves);
std::vector<CategoryStats> parse_category_stats_csv(std::string_view text);

/// Point-and-error-bar chart: one <circle class="median"> and one
/// <line class="errorbar"> per category.
std::string median_chart_svg(std::span<const CategoryStats> stats);
/// One <polyline class="curve"> per category.
std::string exceedance_chart_svg(std::span<const ExceedanceCurve> curves);

/// Writes category_stats.csv, exceedance.csv, fig3.svg and fig4.svg.
void emit_report(std::span<const CategoryStats> stats, std::span<const ExceedanceCurve> curves,
                 const std::filesystem::path& out_dir);

}  // namespace epitome
