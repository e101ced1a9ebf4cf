#ifndef TRUSTAN_FORECAST_H_
#define TRUSTAN_FORECAST_H_

#include <string>
#include <string_view>
#include <vector>

#include "trustan/trend.h"

namespace trustan {

enum class TrendClass { kDeclining, kStable, kRising };

std::string_view trend_class_name(TrendClass c);

struct VerdictOptions {
  int window_weeks = 4;  // trailing calendar weeks ending at the last point
  double theta = 0.05;   // stability threshold, profile units per week
};

struct TrendVerdict {
  std::string entity_id;
  int window_weeks = 0;
  double theta = 0.0;
  std::size_t points = 0;       // profile points inside the window
  double mean_profile = 0.0;
  double trend = 0.0;           // OLS slope of value on week ordinal
  double endpoint_slope = 0.0;  // (last - first) / ordinal span, diagnostic
  TrendClass classification = TrendClass::kStable;
};

inline constexpr const char* kInconclusive = "INCONCLUSIVE";

struct Prediction {
  std::string winner;  // entity id or kInconclusive
  int window_weeks = 0;
  std::vector<TrendVerdict> verdicts;
  std::vector<std::string> rule_trace;

  bool inconclusive() const { return winner == kInconclusive; }
};

// Ordinary least-squares slope of ys against xs. Requires two or more
// points with distinct xs.
double ols_slope(const std::vector<double>& xs, const std::vector<double>& ys);

// Summarizes the profile over the trailing window. Throws InsufficientData
// with fewer than two points inside the window.
TrendVerdict trend_verdict(const WeeklySeries& profile,
                           const VerdictOptions& options = {});

// RISING beats STABLE beats DECLINING; within a class the higher mean
// profile wins; an exact tie is inconclusive. Throws InvalidArgument when
// the verdicts use different windows.
Prediction predict_winner(const TrendVerdict& first,
                          const TrendVerdict& second);

}  // namespace trustan

#endif  // TRUSTAN_FORECAST_H_
