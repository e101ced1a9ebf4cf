#include "trustan/report.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "trustan/errors.h"
#include "trustan/logging.h"

namespace trustan {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void check_entity(const std::string& entity) {
  if (entity.empty() || entity.find_first_of(",\r\n\"") != std::string::npos) {
    throw InvalidArgument("entity id '" + entity + "' cannot be written to CSV");
  }
}

std::string render_rows(std::vector<SeriesRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const SeriesRow& a, const SeriesRow& b) {
    return std::tie(a.entity, a.week, a.kind) < std::tie(b.entity, b.week, b.kind);
  });
  std::string out(kSeriesCsvHeader);
  out.push_back('\n');
  for (const auto& r : rows) {
    check_entity(r.entity);
    out += r.entity;
    out += ',';
    out += std::to_string(r.week.iso_year());
    out += ',';
    out += std::to_string(r.week.iso_week());
    out += ',';
    out += r.kind;
    out += ',';
    out += format_value(r.value);
    out += '\n';
  }
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T* out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), *out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

// ---------------------------------------------------------------------------
// SVG

constexpr double kWidth = 960;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 200;
constexpr double kTop = 44;
constexpr double kBottom = 56;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

struct ChartText {
  const char* title;
  const char* y_label;
};

ChartText chart_text(ChartKind kind) {
  switch (kind) {
    case ChartKind::kProportion:
      return {"Proportion: weekly share of trust and distrust", "proportion"};
    case ChartKind::kSlope:
      return {"Slope: week-to-week change in trust", "slope (per week)"};
    case ChartKind::kProfile:
      return {"Profile: week-to-week change in trust/distrust ratio",
              "ratio slope (per week)"};
  }
  return {"", ""};
}

std::string series_label(const WeeklySeries& s) {
  switch (s.kind) {
    case ValueKind::kTrustProportion:
      return s.entity_id + " trust";
    case ValueKind::kDistrustProportion:
      return s.entity_id + " distrust";
    default:
      return s.entity_id;
  }
}

}  // namespace

std::string format_value(double value) {
  if (!std::isfinite(value)) {
    throw InvalidArgument("non-finite series value cannot be written");
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string render_series_csv(std::span<const WeeklySeries> series) {
  std::vector<SeriesRow> rows;
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      rows.push_back({s.entity_id, p.week, std::string(kind_name(s.kind)), p.value});
    }
  }
  return render_rows(std::move(rows));
}

std::string render_counts_csv(std::span<const WeeklyCounts> counts) {
  std::vector<SeriesRow> rows;
  for (const auto& c : counts) {
    rows.push_back({c.entity_id, c.week, "n_attack", double(c.n_attack)});
    rows.push_back({c.entity_id, c.week, "n_none", double(c.n_none)});
    rows.push_back({c.entity_id, c.week, "n_support", double(c.n_support)});
    rows.push_back({c.entity_id, c.week, "n_total", double(c.n_total())});
  }
  return render_rows(std::move(rows));
}

void emit_series_csv(std::span<const WeeklySeries> series,
                     const std::filesystem::path& path) {
  write_text_file(path, render_series_csv(series));
}

void emit_counts_csv(std::span<const WeeklyCounts> counts,
                     const std::filesystem::path& path) {
  write_text_file(path, render_counts_csv(counts));
}

std::vector<SeriesRow> parse_series_rows(std::string_view csv,
                                         const std::string& source) {
  std::vector<SeriesRow> rows;
  std::size_t line_number = 0;
  std::size_t start = 0;
  bool header_seen = false;
  while (start < csv.size()) {
    auto end = csv.find('\n', start);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(start, end - start);
    start = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kSeriesCsvHeader) {
        throw ParseError(source, line_number, "unexpected CSV header");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 5) {
      throw ParseError(source, line_number, "expected 5 fields");
    }
    int year = 0, week = 0;
    double value = 0.0;
    if (!parse_number(fields[1], &year) || !parse_number(fields[2], &week)) {
      throw ParseError(source, line_number, "bad ISO year/week");
    }
    if (!parse_number(fields[4], &value) || !std::isfinite(value)) {
      throw ParseError(source, line_number, "bad value");
    }
    if (fields[0].empty() || fields[3].empty()) {
      throw ParseError(source, line_number, "empty entity or kind");
    }
    SeriesRow row;
    row.entity = std::string(fields[0]);
    try {
      row.week = WeekIndex::from_iso(year, week);
    } catch (const InvalidArgument& e) {
      throw ParseError(source, line_number, e.what());
    }
    row.kind = std::string(fields[3]);
    row.value = value;
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError(source, 0, "missing CSV header");
  return rows;
}

std::vector<WeeklySeries> parse_series_csv(std::string_view csv,
                                           const std::string& source) {
  std::map<std::pair<std::string, std::string>, WeeklySeries> grouped;
  for (auto& row : parse_series_rows(csv, source)) {
    auto kind = parse_kind(row.kind);
    if (!kind) {
      throw ParseError(source, 0, "unknown series kind '" + row.kind + "'");
    }
    auto& s = grouped[{row.entity, row.kind}];
    s.entity_id = row.entity;
    s.kind = *kind;
    if (!s.points.empty() && !(s.points.back().week < row.week)) {
      throw ParseError(source, 0, "duplicate or unsorted week for " + row.entity +
                                      " " + row.kind);
    }
    s.points.push_back({row.week, row.value});
  }
  std::vector<WeeklySeries> out;
  for (auto& [key, s] : grouped) out.push_back(std::move(s));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.entity_id, a.kind) < std::make_pair(b.entity_id, b.kind);
  });
  return out;
}

std::vector<WeeklySeries> read_series_csv(const std::filesystem::path& path) {
  return parse_series_csv(read_text_file(path), path.string());
}

std::vector<WeeklyCounts> parse_counts_csv(std::string_view csv,
                                           const std::string& source) {
  std::map<std::pair<std::string, std::int64_t>, WeeklyCounts> cells;
  std::map<std::pair<std::string, std::int64_t>, double> totals;
  for (const auto& row : parse_series_rows(csv, source)) {
    if (row.value < 0 || row.value != std::floor(row.value)) {
      throw ParseError(source, 0, "count is not a non-negative integer");
    }
    auto key = std::make_pair(row.entity, row.week.ordinal());
    auto& c = cells[key];
    c.entity_id = row.entity;
    c.week = row.week;
    auto n = static_cast<std::uint64_t>(row.value);
    if (row.kind == "n_support") {
      c.n_support = n;
    } else if (row.kind == "n_attack") {
      c.n_attack = n;
    } else if (row.kind == "n_none") {
      c.n_none = n;
    } else if (row.kind == "n_total") {
      totals[key] = row.value;
    } else {
      throw ParseError(source, 0, "unknown count kind '" + row.kind + "'");
    }
  }
  std::vector<WeeklyCounts> out;
  for (auto& [key, c] : cells) {
    if (auto t = totals.find(key);
        t != totals.end() && t->second != double(c.n_total())) {
      throw ParseError(source, 0, "n_total disagrees with the per-label counts for " +
                                      c.entity_id);
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<WeeklyCounts> read_counts_csv(const std::filesystem::path& path) {
  return parse_counts_csv(read_text_file(path), path.string());
}

std::string_view chart_file_stem(ChartKind kind) {
  switch (kind) {
    case ChartKind::kProportion:
      return "chart_proportion";
    case ChartKind::kSlope:
      return "chart_slope";
    case ChartKind::kProfile:
      return "chart_profile";
  }
  return "chart";
}

std::string render_chart_svg(std::span<const WeeklySeries> series,
                             std::span<const EventMarker> events,
                             ChartKind kind) {
  std::vector<const WeeklySeries*> plotted;
  for (const auto& s : series) {
    if (!s.points.empty()) plotted.push_back(&s);
  }
  if (plotted.empty()) throw InvalidArgument("nothing to plot");

  // X range in days: Monday of the first week to Sunday of the last.
  std::int64_t first_week = plotted.front()->points.front().week.ordinal();
  std::int64_t last_week = first_week;
  double y_min = 0.0, y_max = 0.0;
  for (const auto* s : plotted) {
    for (const auto& p : s->points) {
      first_week = std::min(first_week, p.week.ordinal());
      last_week = std::max(last_week, p.week.ordinal());
      y_min = std::min(y_min, p.value);
      y_max = std::max(y_max, p.value);
    }
  }
  const std::int64_t day_min = days_since_epoch(monday_of_ordinal(first_week));
  const std::int64_t day_max = days_since_epoch(monday_of_ordinal(last_week)) + 6;
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= 1.0;
  }
  double pad = (y_max - y_min) * 0.05;
  y_max += pad;
  y_min -= pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto x_of_day = [&](std::int64_t day) {
    return kLeft + plot_w * static_cast<double>(day - day_min) /
                       static_cast<double>(day_max - day_min);
  };
  auto y_of = [&](double v) {
    return kTop + plot_h * (y_max - v) / (y_max - y_min);
  };

  ChartText text = chart_text(kind);
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth)
      << ' ' << num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      << "<text class=\"title\" x=\"" << num(kLeft) << "\" y=\"24\" font-size=\"15\">"
      << xml_escape(text.title) << "</text>\n";

  // Axes.
  svg << "<g class=\"axes\" stroke=\"#333333\" stroke-width=\"1\">\n"
      << "<path d=\"M" << num(kLeft) << ' ' << num(kTop) << " V"
      << num(kTop + plot_h) << " H" << num(kLeft + plot_w) << "\" fill=\"none\"/>\n"
      << "</g>\n";

  // Y ticks and grid.
  svg << "<g class=\"y-axis\">\n";
  for (int i = 0; i <= 5; ++i) {
    double v = y_min + (y_max - y_min) * i / 5.0;
    double y = y_of(v);
    svg << "<path class=\"grid\" d=\"M" << num(kLeft) << ' ' << num(y) << " H"
        << num(kLeft + plot_w) << "\" stroke=\"#e0e0e0\"/>\n"
        << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  if (y_min < 0.0 && y_max > 0.0) {
    svg << "<path class=\"zero\" d=\"M" << num(kLeft) << ' ' << num(y_of(0.0))
        << " H" << num(kLeft + plot_w) << "\" stroke=\"#999999\"/>\n";
  }
  svg << "<text transform=\"translate(16 " << num(kTop + plot_h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(text.y_label)
      << "</text>\n</g>\n";

  // X ticks at month starts.
  svg << "<g class=\"x-axis\">\n";
  Date start = Date{std::chrono::sys_days{std::chrono::days{day_min}}};
  Date end = Date{std::chrono::sys_days{std::chrono::days{day_max}}};
  auto ym = start.year() / start.month();
  bool any_tick = false;
  for (;; ym += std::chrono::months{1}) {
    Date first{ym / std::chrono::day{1}};
    if (first > end) break;
    if (first < start) continue;
    double x = x_of_day(days_since_epoch(first));
    svg << "<path class=\"tick\" d=\"M" << num(x) << ' ' << num(kTop + plot_h)
        << " V" << num(kTop + plot_h + 5) << "\" stroke=\"#333333\"/>\n"
        << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"middle\">" << format_date(first) << "</text>\n";
    any_tick = true;
  }
  if (!any_tick) {
    svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kTop + plot_h + 18)
        << "\" text-anchor=\"start\">" << format_date(start) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\""
      << num(kHeight - 10) << "\" text-anchor=\"middle\">week (ISO, Monday start)</text>\n"
      << "</g>\n";

  // Event markers.
  svg << "<g class=\"events\">\n";
  for (const auto& e : events) {
    std::int64_t day = days_since_epoch(e.date);
    if (day < day_min || day > day_max) {
      warn("event " + format_date(e.date) + " '" + e.label +
           "' is outside the plotted range; marker omitted");
      continue;
    }
    double x = x_of_day(day);
    svg << "<line class=\"event-marker\" x1=\"" << num(x) << "\" y1=\""
        << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\"" << num(kTop + plot_h)
        << "\" stroke=\"#555555\" stroke-dasharray=\"4 3\"><title>"
        << format_date(e.date) << ' ' << xml_escape(e.label)
        << "</title></line>\n"
        << "<text class=\"event-label\" transform=\"translate(" << num(x + 3)
        << ' ' << num(kTop + 4) << ") rotate(90)\" font-size=\"9\" fill=\"#555555\">"
        << xml_escape(e.label) << "</text>\n";
  }
  svg << "</g>\n";

  // Series.
  svg << "<g class=\"series\" fill=\"none\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < plotted.size(); ++i) {
    const auto* s = plotted[i];
    const char* color = kPalette[i % std::size(kPalette)];
    svg << "<polyline data-entity=\"" << xml_escape(s->entity_id)
        << "\" data-kind=\"" << kind_name(s->kind) << "\" stroke=\"" << color
        << "\" points=\"";
    for (std::size_t k = 0; k < s->points.size(); ++k) {
      const auto& p = s->points[k];
      if (k) svg << ' ';
      svg << num(x_of_day(days_since_epoch(p.week.monday()))) << ','
          << num(y_of(p.value));
    }
    svg << "\"/>\n";
    for (const auto& p : s->points) {
      svg << "<circle cx=\"" << num(x_of_day(days_since_epoch(p.week.monday())))
          << "\" cy=\"" << num(y_of(p.value)) << "\" r=\"2.5\" fill=\"" << color
          << "\" stroke=\"none\"/>\n";
    }
  }
  svg << "</g>\n";

  // Legend.
  svg << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < plotted.size(); ++i) {
    double y = kTop + 10 + 18.0 * static_cast<double>(i);
    double x = kLeft + plot_w + 16;
    svg << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8) << "\" width=\"14\" "
        << "height=\"4\" fill=\"" << kPalette[i % std::size(kPalette)] << "\"/>\n"
        << "<text x=\"" << num(x + 20) << "\" y=\"" << num(y - 2) << "\">"
        << xml_escape(series_label(*plotted[i])) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void emit_chart_svg(std::span<const WeeklySeries> series,
                    std::span<const EventMarker> events, ChartKind kind,
                    const std::filesystem::path& path) {
  write_text_file(path, render_chart_svg(series, events, kind));
}

std::string render_prediction_json(const Prediction& prediction) {
  ordered_json doc;
  doc["winner"] = prediction.winner;
  doc["window_weeks"] = prediction.window_weeks;
  doc["theta"] = prediction.verdicts.empty() ? 0.0 : prediction.verdicts.front().theta;
  doc["verdicts"] = ordered_json::array();
  for (const auto& v : prediction.verdicts) {
    ordered_json item;
    item["entity_id"] = v.entity_id;
    item["window_weeks"] = v.window_weeks;
    item["points"] = v.points;
    item["mean_profile"] = v.mean_profile;
    item["trend"] = v.trend;
    item["endpoint_slope"] = v.endpoint_slope;
    item["classification"] = trend_class_name(v.classification);
    doc["verdicts"].push_back(std::move(item));
  }
  doc["rule_trace"] = prediction.rule_trace;
  return doc.dump(2) + "\n";
}

std::string format_labeled_line(const LabeledMention& lm) {
  ordered_json record;
  const auto& s = lm.mention.sentence;
  record["sentence_id"] = s.sentence_id;
  record["post_id"] = s.post_id;
  record["ordinal"] = s.ordinal;
  record["created_at"] = format_utc(s.created_at);
  record["entity_id"] = lm.mention.entity_id;
  record["text"] = s.text;
  record["label"] = label_name(lm.label);
  record["confidence"] =
      lm.confidence ? ordered_json(*lm.confidence) : ordered_json(nullptr);
  record["classifier_id"] = lm.classifier_id;
  return record.dump(-1, ' ', false, json::error_handler_t::strict);
}

LabeledMention parse_labeled_line(std::string_view line, const std::string& source,
                                  std::size_t line_number) {
  json r;
  try {
    r = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(source, line_number, std::string("invalid JSON: ") + e.what());
  }
  try {
    LabeledMention lm;
    auto& s = lm.mention.sentence;
    s.sentence_id = r.at("sentence_id").get<std::string>();
    s.post_id = r.at("post_id").get<std::string>();
    s.ordinal = r.at("ordinal").get<std::size_t>();
    auto ts = parse_utc(r.at("created_at").get<std::string>());
    if (!ts) throw ParseError(source, line_number, "unparseable created_at");
    s.created_at = *ts;
    s.text = r.at("text").get<std::string>();
    lm.mention.entity_id = r.at("entity_id").get<std::string>();
    auto label = parse_label(r.at("label").get<std::string>());
    if (!label) throw ParseError(source, line_number, "unknown label");
    lm.label = *label;
    const auto& c = r.at("confidence");
    if (!c.is_null()) {
      double v = c.get<double>();
      if (v < 0.0 || v > 1.0) {
        throw ParseError(source, line_number, "confidence outside [0,1]");
      }
      lm.confidence = v;
    }
    lm.classifier_id = r.at("classifier_id").get<std::string>();
    if (lm.classifier_id.empty()) {
      throw ParseError(source, line_number, "empty classifier_id");
    }
    return lm;
  } catch (const json::exception& e) {
    throw ParseError(source, line_number, e.what());
  }
}

void write_labeled_mentions(std::span<const LabeledMention> labels,
                            const std::filesystem::path& path) {
  std::string out;
  for (const auto& lm : labels) {
    out += format_labeled_line(lm);
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<LabeledMention> read_labeled_mentions(
    const std::filesystem::path& path) {
  std::string content = read_text_file(path);
  std::vector<LabeledMention> out;
  std::size_t start = 0, line_number = 0;
  while (start < content.size()) {
    auto end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string_view line(content.data() + start, end - start);
    start = end + 1;
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(parse_labeled_line(line, path.string(), line_number));
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError(path.string(), "write failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(path.string(), "read failed");
  return buffer.str();
}

}  // namespace trustan
