#include "trustan/trend.h"

#include <algorithm>
#include <map>
#include <tuple>

#include "trustan/errors.h"
#include "trustan/logging.h"

namespace trustan {

WeekIndex WeekIndex::from_ordinal(std::int64_t ordinal) {
  WeekIndex w;
  IsoWeek iso = iso_week_of_ordinal(ordinal);
  w.iso_year_ = iso.year;
  w.iso_week_ = iso.week;
  w.ordinal_ = ordinal;
  return w;
}

WeekIndex WeekIndex::from_iso(int iso_year, int iso_week) {
  return from_ordinal(ordinal_of_iso_week(iso_year, iso_week));
}

WeekIndex WeekIndex::of(Timestamp ts) { return of(date_of(ts)); }

WeekIndex WeekIndex::of(Date date) { return from_ordinal(week_ordinal_of(date)); }

std::string_view kind_name(ValueKind kind) {
  switch (kind) {
    case ValueKind::kTrustProportion:
      return "trust_proportion";
    case ValueKind::kDistrustProportion:
      return "distrust_proportion";
    case ValueKind::kTrustSlope:
      return "trust_slope";
    case ValueKind::kRatio:
      return "ratio";
    case ValueKind::kProfile:
      return "profile";
  }
  return "";
}

std::optional<ValueKind> parse_kind(std::string_view name) {
  for (auto kind : {ValueKind::kTrustProportion, ValueKind::kDistrustProportion,
                    ValueKind::kTrustSlope, ValueKind::kRatio,
                    ValueKind::kProfile}) {
    if (kind_name(kind) == name) return kind;
  }
  return std::nullopt;
}

std::vector<WeeklyCounts> bin_weekly(std::span<const LabeledMention> labels) {
  std::map<std::pair<std::string, std::int64_t>, WeeklyCounts> cells;
  for (const auto& lm : labels) {
    WeekIndex week = WeekIndex::of(lm.mention.sentence.created_at);
    auto key = std::make_pair(lm.mention.entity_id, week.ordinal());
    auto [it, inserted] = cells.try_emplace(key);
    if (inserted) {
      it->second.entity_id = lm.mention.entity_id;
      it->second.week = week;
    }
    switch (lm.label) {
      case EthosLabel::kSupport:
        ++it->second.n_support;
        break;
      case EthosLabel::kAttack:
        ++it->second.n_attack;
        break;
      case EthosLabel::kNone:
        ++it->second.n_none;
        break;
    }
  }
  std::vector<WeeklyCounts> out;
  out.reserve(cells.size());
  for (auto& [key, cell] : cells) out.push_back(std::move(cell));
  return out;
}

namespace {

std::string single_entity(std::span<const WeeklyCounts> counts) {
  if (counts.empty()) return {};
  const std::string& entity = counts.front().entity_id;
  for (const auto& c : counts) {
    if (c.entity_id != entity) {
      throw InvalidArgument("series input mixes entities " + entity + " and " +
                            c.entity_id);
    }
  }
  return entity;
}

std::vector<const WeeklyCounts*> sorted_cells(
    std::span<const WeeklyCounts> counts, std::uint64_t min_n) {
  std::vector<const WeeklyCounts*> cells;
  for (const auto& c : counts) {
    if (c.n_total() >= std::max<std::uint64_t>(min_n, 1)) cells.push_back(&c);
  }
  std::sort(cells.begin(), cells.end(),
            [](const auto* a, const auto* b) { return a->week < b->week; });
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i]->week == cells[i - 1]->week) {
      throw InvalidArgument("duplicate week in counts for " +
                            cells[i]->entity_id);
    }
  }
  return cells;
}

}  // namespace

WeeklySeries proportion_series(std::span<const WeeklyCounts> counts,
                               ValueKind kind, std::uint64_t min_n) {
  if (kind != ValueKind::kTrustProportion &&
      kind != ValueKind::kDistrustProportion) {
    throw InvalidArgument("proportion_series needs a proportion kind");
  }
  WeeklySeries series{single_entity(counts), kind, {}};
  for (const auto* c : sorted_cells(counts, min_n)) {
    auto numerator = kind == ValueKind::kTrustProportion ? c->n_support
                                                         : c->n_attack;
    series.points.push_back(
        {c->week, static_cast<double>(numerator) /
                      static_cast<double>(c->n_total())});
  }
  return series;
}

WeeklySeries slope_series(const WeeklySeries& series,
                          std::optional<ValueKind> out_kind) {
  WeeklySeries out{series.entity_id,
                   out_kind.value_or(series.kind == ValueKind::kRatio
                                         ? ValueKind::kProfile
                                         : ValueKind::kTrustSlope),
                   {}};
  if (series.points.size() < 2) {
    warn("slope of " + series.entity_id + " " +
         std::string(kind_name(series.kind)) + " needs at least 2 weeks, got " +
         std::to_string(series.points.size()));
    return out;
  }
  out.points.reserve(series.points.size() - 1);
  for (std::size_t i = 1; i < series.points.size(); ++i) {
    const auto& p0 = series.points[i - 1];
    const auto& p1 = series.points[i];
    auto dx = p1.week.ordinal() - p0.week.ordinal();
    if (dx <= 0) {
      throw InvalidArgument("series weeks are not strictly increasing");
    }
    out.points.push_back(
        {p1.week, (p1.value - p0.value) / static_cast<double>(dx)});
  }
  return out;
}

double smoothed_ratio(std::uint64_t n_support, std::uint64_t n_attack,
                      double alpha) {
  return (static_cast<double>(n_support) + alpha) /
         (static_cast<double>(n_attack) + alpha);
}

WeeklySeries ratio_series(std::span<const WeeklyCounts> counts,
                          const MetricOptions& options) {
  if (options.alpha < 0.0) throw InvalidArgument("alpha must be >= 0");
  WeeklySeries series{single_entity(counts), ValueKind::kRatio, {}};
  for (const auto* c : sorted_cells(counts, options.min_n)) {
    if (options.alpha == 0.0 && c->n_attack == 0) {
      // Unsmoothed ratio is undefined here; leave the week out.
      warn("ratio of " + c->entity_id + " undefined in week " +
           std::to_string(c->week.iso_year()) + "-W" +
           std::to_string(c->week.iso_week()) + " (no distrust, alpha 0)");
      continue;
    }
    series.points.push_back(
        {c->week, smoothed_ratio(c->n_support, c->n_attack, options.alpha)});
  }
  return series;
}

WeeklySeries trust_profile(std::span<const WeeklyCounts> counts,
                           const MetricOptions& options) {
  return slope_series(ratio_series(counts, options), ValueKind::kProfile);
}

std::vector<EventMarker> default_events() {
  using std::chrono::day;
  using std::chrono::month;
  using std::chrono::year;
  auto d = [](unsigned m, unsigned dd) {
    return Date{year{2024}, month{m}, day{dd}};
  };
  return {
      {d(6, 27), "Biden–Trump debate"},
      {d(7, 13), "assassination attempt"},
      {d(7, 21), "Biden withdrawal"},
      {d(8, 5), "Harris nominee"},
      {d(9, 10), "Harris–Trump debate"},
      {d(10, 16), "Fox News interview"},
  };
}

std::vector<WeeklyCounts> counts_for(std::span<const WeeklyCounts> counts,
                                     std::string_view entity_id) {
  std::vector<WeeklyCounts> out;
  for (const auto& c : counts) {
    if (c.entity_id == entity_id) out.push_back(c);
  }
  return out;
}

std::vector<EntityMetrics> compute_metrics(std::span<const WeeklyCounts> counts,
                                           const MetricOptions& options) {
  std::vector<std::string> entities;
  for (const auto& c : counts) entities.push_back(c.entity_id);
  std::sort(entities.begin(), entities.end());
  entities.erase(std::unique(entities.begin(), entities.end()), entities.end());

  std::vector<EntityMetrics> out;
  for (const auto& entity : entities) {
    EntityMetrics m;
    m.entity_id = entity;
    m.counts = counts_for(counts, entity);
    std::sort(m.counts.begin(), m.counts.end(),
              [](const auto& a, const auto& b) { return a.week < b.week; });
    m.trust = proportion_series(m.counts, ValueKind::kTrustProportion,
                                options.min_n);
    m.distrust = proportion_series(m.counts, ValueKind::kDistrustProportion,
                                   options.min_n);
    m.trust_slope = slope_series(m.trust, ValueKind::kTrustSlope);
    m.ratio = ratio_series(m.counts, options);
    m.profile = slope_series(m.ratio, ValueKind::kProfile);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace trustan
