#ifndef TRUSTAN_REPORT_H_
#define TRUSTAN_REPORT_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/ethos.h"
#include "trustan/forecast.h"
#include "trustan/trend.h"

namespace trustan {

// Series CSV: header "entity,iso_year,iso_week,kind,value", values with six
// decimals, LF endings, rows sorted by (entity, week, kind).
inline constexpr std::string_view kSeriesCsvHeader =
    "entity,iso_year,iso_week,kind,value";

struct SeriesRow {
  std::string entity;
  WeekIndex week;
  std::string kind;
  double value = 0.0;
};

// "%.6f", with negative zero printed as "0.000000".
std::string format_value(double value);

std::string render_series_csv(std::span<const WeeklySeries> series);
// Count rows use kinds n_support, n_attack, n_none, n_total.
std::string render_counts_csv(std::span<const WeeklyCounts> counts);
void emit_series_csv(std::span<const WeeklySeries> series,
                     const std::filesystem::path& path);
void emit_counts_csv(std::span<const WeeklyCounts> counts,
                     const std::filesystem::path& path);

// Throws ParseError on a bad header, field count, week or number.
std::vector<SeriesRow> parse_series_rows(std::string_view csv,
                                         const std::string& source = "");
// Groups rows into series ordered by (entity, kind). Rows whose kind is
// not a series kind are rejected.
std::vector<WeeklySeries> parse_series_csv(std::string_view csv,
                                           const std::string& source = "");
std::vector<WeeklySeries> read_series_csv(const std::filesystem::path& path);
std::vector<WeeklyCounts> parse_counts_csv(std::string_view csv,
                                           const std::string& source = "");
std::vector<WeeklyCounts> read_counts_csv(const std::filesystem::path& path);

enum class ChartKind { kProportion, kSlope, kProfile };

std::string_view chart_file_stem(ChartKind kind);

// Standalone SVG with one polyline per non-empty series, a legend, a dated
// x axis and one vertical line (class "event-marker") per event inside the
// plotted range. Out-of-range events are skipped with a warning. Throws
// InvalidArgument when every series is empty.
std::string render_chart_svg(std::span<const WeeklySeries> series,
                             std::span<const EventMarker> events,
                             ChartKind kind);
void emit_chart_svg(std::span<const WeeklySeries> series,
                    std::span<const EventMarker> events, ChartKind kind,
                    const std::filesystem::path& path);

// {"winner", "window_weeks", "theta", "verdicts": [...], "rule_trace": [...]}
std::string render_prediction_json(const Prediction& prediction);

// Labeled mentions, one JSON object per line.
std::string format_labeled_line(const LabeledMention& lm);
LabeledMention parse_labeled_line(std::string_view line,
                                  const std::string& source = "",
                                  std::size_t line_number = 0);
void write_labeled_mentions(std::span<const LabeledMention> labels,
                            const std::filesystem::path& path);
std::vector<LabeledMention> read_labeled_mentions(
    const std::filesystem::path& path);

// Writes content to path, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace trustan

#endif  // TRUSTAN_REPORT_H_
