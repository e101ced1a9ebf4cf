#include "trustan/forecast.h"

#include <cstdio>

#include "trustan/errors.h"

namespace trustan {
namespace {

int rank(TrendClass c) {
  switch (c) {
    case TrendClass::kDeclining:
      return 0;
    case TrendClass::kStable:
      return 1;
    case TrendClass::kRising:
      return 2;
  }
  return 1;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string describe(const TrendVerdict& v) {
  return v.entity_id + ": " + std::string(trend_class_name(v.classification)) +
         " (trend " + fmt(v.trend) + "/week over " + std::to_string(v.points) +
         " points, mean profile " + fmt(v.mean_profile) + ")";
}

}  // namespace

std::string_view trend_class_name(TrendClass c) {
  switch (c) {
    case TrendClass::kDeclining:
      return "DECLINING";
    case TrendClass::kStable:
      return "STABLE";
    case TrendClass::kRising:
      return "RISING";
  }
  return "STABLE";
}

double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw InsufficientData("least-squares slope needs at least 2 points");
  }
  double n = static_cast<double>(xs.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
  }
  if (sxx == 0.0) throw InsufficientData("least-squares slope needs distinct x");
  return sxy / sxx;
}

TrendVerdict trend_verdict(const WeeklySeries& profile,
                           const VerdictOptions& options) {
  if (options.window_weeks < 1) throw InvalidArgument("window_weeks must be >= 1");
  if (options.theta < 0.0) throw InvalidArgument("theta must be >= 0");
  TrendVerdict v;
  v.entity_id = profile.entity_id;
  v.window_weeks = options.window_weeks;
  v.theta = options.theta;

  std::vector<double> xs, ys;
  if (!profile.points.empty()) {
    std::int64_t last = profile.points.back().week.ordinal();
    for (const auto& p : profile.points) {
      if (p.week.ordinal() > last - options.window_weeks) {
        xs.push_back(static_cast<double>(p.week.ordinal()));
        ys.push_back(p.value);
      }
    }
  }
  v.points = xs.size();
  if (xs.size() < 2) {
    throw InsufficientData("insufficient data: " + profile.entity_id + " has " +
                           std::to_string(xs.size()) +
                           " profile points in the last " +
                           std::to_string(options.window_weeks) + " weeks");
  }
  double sum = 0.0;
  for (double y : ys) sum += y;
  v.mean_profile = sum / static_cast<double>(ys.size());
  v.trend = ols_slope(xs, ys);
  v.endpoint_slope = (ys.back() - ys.front()) / (xs.back() - xs.front());
  if (v.trend < -options.theta) {
    v.classification = TrendClass::kDeclining;
  } else if (v.trend > options.theta) {
    v.classification = TrendClass::kRising;
  } else {
    v.classification = TrendClass::kStable;
  }
  return v;
}

Prediction predict_winner(const TrendVerdict& first,
                          const TrendVerdict& second) {
  if (first.window_weeks != second.window_weeks) {
    throw InvalidArgument("verdicts use different windows (" +
                          std::to_string(first.window_weeks) + " vs " +
                          std::to_string(second.window_weeks) + " weeks)");
  }
  Prediction p;
  p.window_weeks = first.window_weeks;
  p.verdicts = {first, second};
  p.rule_trace.push_back("window " + std::to_string(first.window_weeks) +
                         " weeks, theta " + fmt(first.theta) +
                         " profile units/week");
  p.rule_trace.push_back(describe(first));
  p.rule_trace.push_back(describe(second));

  int r1 = rank(first.classification);
  int r2 = rank(second.classification);
  if (r1 != r2) {
    const TrendVerdict& w = r1 > r2 ? first : second;
    const TrendVerdict& l = r1 > r2 ? second : first;
    p.winner = w.entity_id;
    p.rule_trace.push_back("class: " + std::string(trend_class_name(w.classification)) +
                           " beats " + std::string(trend_class_name(l.classification)) +
                           " -> " + w.entity_id);
    return p;
  }
  p.rule_trace.push_back("class: both " +
                         std::string(trend_class_name(first.classification)));
  if (first.mean_profile != second.mean_profile) {
    const TrendVerdict& w =
        first.mean_profile > second.mean_profile ? first : second;
    p.winner = w.entity_id;
    p.rule_trace.push_back("mean profile: " + fmt(w.mean_profile) +
                           " is higher -> " + w.entity_id);
    return p;
  }
  p.winner = kInconclusive;
  p.rule_trace.push_back("mean profile: exact tie -> " +
                         std::string(kInconclusive));
  return p;
}

}  // namespace trustan
