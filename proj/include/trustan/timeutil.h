#ifndef TRUSTAN_TIMEUTIL_H_
#define TRUSTAN_TIMEUTIL_H_

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace trustan {

// All instants are UTC with second precision.
using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

// Parses "YYYY-MM-DDTHH:MM:SSZ". A numeric offset ("+02:00", "-0500") in
// place of 'Z' is accepted and converted to UTC. Returns nullopt for
// anything else, including out-of-range fields.
std::optional<Timestamp> parse_utc(std::string_view text);

// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_utc(Timestamp ts);

// Fractional epoch seconds are truncated toward negative infinity.
Timestamp from_epoch_seconds(double seconds);

// Parses "YYYY-MM-DD".
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date date);

Date date_of(Timestamp ts);
std::int64_t days_since_epoch(Date date);

// ISO-8601 week arithmetic. The week ordinal counts Monday-start weeks from
// the week containing 1970-01-01 (ordinal 0 starts Monday 1969-12-29).
struct IsoWeek {
  int year = 0;
  int week = 0;
  friend bool operator==(const IsoWeek&, const IsoWeek&) = default;
};

std::int64_t week_ordinal_of(Date date);
IsoWeek iso_week_of_ordinal(std::int64_t ordinal);
// Throws InvalidArgument when the week does not exist in that ISO year.
std::int64_t ordinal_of_iso_week(int iso_year, int iso_week);
Date monday_of_ordinal(std::int64_t ordinal);

}  // namespace trustan

#endif  // TRUSTAN_TIMEUTIL_H_
