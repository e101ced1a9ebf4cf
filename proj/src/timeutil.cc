#include "trustan/timeutil.h"

#include <cmath>
#include <cstdio>

#include "trustan/errors.h"

namespace trustan {
namespace {

using std::chrono::day;
using std::chrono::days;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;

bool read_digits(std::string_view text, std::size_t pos, std::size_t n,
                 int* out) {
  if (pos + n > text.size()) return false;
  int value = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    char c = text[i];
    if (c < '0' || c > '9') return false;
    value = value * 10 + (c - '0');
  }
  *out = value;
  return true;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    return std::nullopt;
  }
  int y, m, d;
  if (!read_digits(text, 0, 4, &y) || !read_digits(text, 5, 2, &m) ||
      !read_digits(text, 8, 2, &d)) {
    return std::nullopt;
  }
  Date date{year{y}, month{static_cast<unsigned>(m)},
            day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::optional<Timestamp> parse_utc(std::string_view text) {
  if (text.size() < 20 || text[10] != 'T' || text[13] != ':' ||
      text[16] != ':') {
    return std::nullopt;
  }
  auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  int hh, mm, ss;
  if (!read_digits(text, 11, 2, &hh) || !read_digits(text, 14, 2, &mm) ||
      !read_digits(text, 17, 2, &ss)) {
    return std::nullopt;
  }
  if (hh > 23 || mm > 59 || ss > 59) return std::nullopt;

  std::string_view zone = text.substr(19);
  int offset_minutes = 0;
  if (zone == "Z") {
    offset_minutes = 0;
  } else if (zone.size() == 6 || zone.size() == 5) {
    if (zone[0] != '+' && zone[0] != '-') return std::nullopt;
    int oh, om;
    std::size_t minute_pos = zone.size() == 6 ? 4 : 3;
    if (zone.size() == 6 && zone[3] != ':') return std::nullopt;
    if (!read_digits(zone, 1, 2, &oh) ||
        !read_digits(zone, minute_pos, 2, &om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset_minutes = (oh * 60 + om) * (zone[0] == '-' ? -1 : 1);
  } else {
    return std::nullopt;
  }

  Timestamp local = sys_days{*date} + std::chrono::hours{hh} +
                    std::chrono::minutes{mm} + std::chrono::seconds{ss};
  return local - std::chrono::minutes{offset_minutes};
}

std::string format_utc(Timestamp ts) {
  sys_days dp = std::chrono::floor<days>(ts);
  Date date{dp};
  std::chrono::hh_mm_ss hms{ts - dp};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Timestamp from_epoch_seconds(double seconds) {
  return Timestamp{std::chrono::seconds{
      static_cast<std::int64_t>(std::floor(seconds))}};
}

std::string format_date(Date date) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u",
                static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()),
                static_cast<unsigned>(date.day()));
  return buf;
}

Date date_of(Timestamp ts) {
  return Date{std::chrono::floor<days>(ts)};
}

std::int64_t days_since_epoch(Date date) {
  return sys_days{date}.time_since_epoch().count();
}

// 1970-01-01 was a Thursday, so the Monday starting its week is day -3.
std::int64_t week_ordinal_of(Date date) {
  return floor_div(days_since_epoch(date) + 3, 7);
}

Date monday_of_ordinal(std::int64_t ordinal) {
  return Date{sys_days{days{ordinal * 7 - 3}}};
}

// The ISO year of a week is the calendar year of its Thursday.
IsoWeek iso_week_of_ordinal(std::int64_t ordinal) {
  sys_days thursday = sys_days{monday_of_ordinal(ordinal)} + days{3};
  Date thursday_date{thursday};
  sys_days jan1 = sys_days{thursday_date.year() / month{1} / day{1}};
  auto day_of_year = (thursday - jan1).count();
  return IsoWeek{static_cast<int>(thursday_date.year()),
                 static_cast<int>(day_of_year / 7 + 1)};
}

std::int64_t ordinal_of_iso_week(int iso_year, int iso_week) {
  // Week 1 is the week containing January 4th.
  Date jan4{year{iso_year}, month{1}, day{4}};
  std::int64_t ordinal = week_ordinal_of(jan4) + (iso_week - 1);
  if (iso_week < 1 || iso_week > 53 ||
      iso_week_of_ordinal(ordinal) != IsoWeek{iso_year, iso_week}) {
    throw InvalidArgument("no ISO week " + std::to_string(iso_year) + "-W" +
                          std::to_string(iso_week));
  }
  return ordinal;
}

}  // namespace trustan
