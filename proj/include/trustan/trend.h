#ifndef TRUSTAN_TREND_H_
#define TRUSTAN_TREND_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustan/ethos.h"
#include "trustan/timeutil.h"

namespace trustan {

// ISO-8601 week (Monday start, UTC) plus a linear ordinal for arithmetic.
class WeekIndex {
 public:
  WeekIndex() = default;

  static WeekIndex from_ordinal(std::int64_t ordinal);
  static WeekIndex from_iso(int iso_year, int iso_week);
  static WeekIndex of(Timestamp ts);
  static WeekIndex of(Date date);

  int iso_year() const { return iso_year_; }
  int iso_week() const { return iso_week_; }
  std::int64_t ordinal() const { return ordinal_; }
  Date monday() const { return monday_of_ordinal(ordinal_); }

  friend bool operator==(const WeekIndex& a, const WeekIndex& b) {
    return a.ordinal_ == b.ordinal_;
  }
  friend auto operator<=>(const WeekIndex& a, const WeekIndex& b) {
    return a.ordinal_ <=> b.ordinal_;
  }

 private:
  int iso_year_ = 1970;
  int iso_week_ = 1;
  std::int64_t ordinal_ = 0;
};

struct WeeklyCounts {
  std::string entity_id;
  WeekIndex week;
  std::uint64_t n_support = 0;
  std::uint64_t n_attack = 0;
  std::uint64_t n_none = 0;

  std::uint64_t n_total() const { return n_support + n_attack + n_none; }
  friend bool operator==(const WeeklyCounts&, const WeeklyCounts&) = default;
};

enum class ValueKind {
  kTrustProportion,
  kDistrustProportion,
  kTrustSlope,
  kRatio,
  kProfile,
};

std::string_view kind_name(ValueKind kind);
std::optional<ValueKind> parse_kind(std::string_view name);

struct SeriesPoint {
  WeekIndex week;
  double value = 0.0;
  friend bool operator==(const SeriesPoint&, const SeriesPoint&) = default;
};

// Points are strictly increasing in week ordinal.
struct WeeklySeries {
  std::string entity_id;
  ValueKind kind = ValueKind::kTrustProportion;
  std::vector<SeriesPoint> points;

  friend bool operator==(const WeeklySeries&, const WeeklySeries&) = default;
};

struct EventMarker {
  Date date;
  std::string label;
};

struct MetricOptions {
  std::uint64_t min_n = 1;  // weeks with fewer mentions are omitted
  double alpha = 1.0;       // additive smoothing for the ratio
};

// One cell per (entity, ISO week) with at least one mention, sorted by
// (entity_id, week).
std::vector<WeeklyCounts> bin_weekly(std::span<const LabeledMention> labels);

// Counts of one entity; trust = n_support / n_total and
// distrust = n_attack / n_total.
WeeklySeries proportion_series(std::span<const WeeklyCounts> counts,
                               ValueKind kind, std::uint64_t min_n = 1);

// Week-to-week slope (y1 - y0) / (x1 - x0) at each later week of a
// consecutive pair, where x is the week ordinal. Gaps use the true ordinal
// difference. Fewer than two points yields an empty series and a warning.
// The output kind defaults to kProfile for ratio input and kTrustSlope
// otherwise.
WeeklySeries slope_series(const WeeklySeries& series,
                          std::optional<ValueKind> out_kind = std::nullopt);

// (n_support + alpha) / (n_attack + alpha) per week.
double smoothed_ratio(std::uint64_t n_support, std::uint64_t n_attack,
                      double alpha);
WeeklySeries ratio_series(std::span<const WeeklyCounts> counts,
                          const MetricOptions& options = {});

// slope_series(ratio_series(counts)).
WeeklySeries trust_profile(std::span<const WeeklyCounts> counts,
                           const MetricOptions& options = {});

// The six campaign events of 2024 marked on every chart.
std::vector<EventMarker> default_events();

// Every metric series for every entity present in counts.
struct EntityMetrics {
  std::string entity_id;
  std::vector<WeeklyCounts> counts;
  WeeklySeries trust;
  WeeklySeries distrust;
  WeeklySeries trust_slope;
  WeeklySeries ratio;
  WeeklySeries profile;
};

std::vector<EntityMetrics> compute_metrics(std::span<const WeeklyCounts> counts,
                                           const MetricOptions& options = {});

// Filters counts down to one entity.
std::vector<WeeklyCounts> counts_for(std::span<const WeeklyCounts> counts,
                                     std::string_view entity_id);

}  // namespace trustan

#endif  // TRUSTAN_TREND_H_
