#include "trustan/forecast.h"

#include <gtest/gtest.h>

#include <random>

#include "trustan/errors.h"

namespace trustan {
namespace {

WeeklySeries profile(const std::string& entity, std::vector<double> values,
                     int first_week = 30) {
  WeeklySeries out{entity, ValueKind::kProfile, {}};
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.points.push_back(
        {WeekIndex::from_iso(2024, first_week + static_cast<int>(i)), values[i]});
  }
  return out;
}

TrendVerdict verdict(const std::string& entity, TrendClass c, double mean) {
  TrendVerdict v;
  v.entity_id = entity;
  v.window_weeks = 4;
  v.theta = 0.05;
  v.points = 4;
  v.mean_profile = mean;
  v.classification = c;
  return v;
}

TEST(OlsSlope, Basics) {
  EXPECT_NEAR(ols_slope({0, 1, 2, 3}, {0.5, 0.2, -0.3, -0.6}), -0.38, 1e-12);
  EXPECT_DOUBLE_EQ(ols_slope({4, 9}, {1, 11}), 2.0);
  EXPECT_THROW(ols_slope({1}, {1}), InsufficientData);
  EXPECT_THROW(ols_slope({1, 1}, {1, 2}), InsufficientData);
}

TEST(TrendVerdict, Examples) {
  auto v = trend_verdict(profile("H", {0.5, 0.2, -0.3, -0.6}));
  EXPECT_NEAR(v.trend, -0.38, 1e-12);
  EXPECT_NEAR(v.mean_profile, -0.05, 1e-12);
  EXPECT_NEAR(v.endpoint_slope, -1.1 / 3, 1e-12);
  EXPECT_EQ(v.points, 4u);
  EXPECT_EQ(v.classification, TrendClass::kDeclining);

  auto up = trend_verdict(profile("T", {-1, 1}));
  EXPECT_DOUBLE_EQ(up.trend, 2.0);
  EXPECT_EQ(up.classification, TrendClass::kRising);

  auto flat = trend_verdict(profile("T", {0, 0, 0, 0, 0}));
  EXPECT_EQ(flat.classification, TrendClass::kStable);
  EXPECT_EQ(flat.trend, 0.0);
}

TEST(TrendVerdict, WindowIsTrailingCalendarWeeks) {
  // Only weeks 33..36 fall inside a 4-week window ending at 36.
  auto v = trend_verdict(profile("E", {9, 9, 9, 1, 2, 3, 4}));
  EXPECT_EQ(v.points, 4u);
  EXPECT_DOUBLE_EQ(v.trend, 1.0);

  WeeklySeries gappy{"E", ValueKind::kProfile,
                     {{WeekIndex::from_iso(2024, 30), 1.0},
                      {WeekIndex::from_iso(2024, 36), 2.0}}};
  EXPECT_THROW(trend_verdict(gappy), InsufficientData);
  EXPECT_THROW(trend_verdict(profile("E", {})), InsufficientData);
  EXPECT_EQ(trend_verdict(gappy, {.window_weeks = 7}).points, 2u);
}

TEST(TrendVerdict, ThresholdBoundaries) {
  VerdictOptions opts{.window_weeks = 2, .theta = 0.5};
  EXPECT_EQ(trend_verdict(profile("E", {0, 0.5}), opts).classification,
            TrendClass::kStable);
  EXPECT_EQ(trend_verdict(profile("E", {0, -0.5}), opts).classification,
            TrendClass::kStable);
  EXPECT_EQ(trend_verdict(profile("E", {0, 0.75}), opts).classification,
            TrendClass::kRising);
}

TEST(PredictWinner, RuleOrder) {
  auto trump = verdict("TRUMP", TrendClass::kStable, 0.0);
  auto harris = verdict("HARRIS", TrendClass::kDeclining, -0.05);
  auto p = predict_winner(trump, harris);
  EXPECT_EQ(p.winner, "TRUMP");
  EXPECT_FALSE(p.inconclusive());
  EXPECT_EQ(p.verdicts.size(), 2u);
  ASSERT_FALSE(p.rule_trace.empty());
  EXPECT_NE(p.rule_trace.back().find("class"), std::string::npos);

  EXPECT_EQ(predict_winner(verdict("A", TrendClass::kRising, -1.0),
                           verdict("B", TrendClass::kStable, 5.0)).winner, "A");
  EXPECT_EQ(predict_winner(verdict("A", TrendClass::kStable, 0.1),
                           verdict("B", TrendClass::kStable, 0.2)).winner, "B");
  auto tie = predict_winner(verdict("A", TrendClass::kStable, 0.1),
                            verdict("B", TrendClass::kStable, 0.1));
  EXPECT_TRUE(tie.inconclusive());
  EXPECT_EQ(tie.winner, "INCONCLUSIVE");

  auto other = verdict("B", TrendClass::kStable, 0.0);
  other.window_weeks = 3;
  EXPECT_THROW(predict_winner(trump, other), InvalidArgument);
}

TEST(PredictWinner, SymmetricAndDependsOnlyOnClassAndMean) {
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto a = verdict("A", static_cast<TrendClass>(rng() % 3), (rng() % 5) * 0.1);
    auto b = verdict("B", static_cast<TrendClass>(rng() % 3), (rng() % 5) * 0.1);
    EXPECT_EQ(predict_winner(a, b).winner, predict_winner(b, a).winner);
    auto a2 = a;
    a2.trend = 123.0;
    a2.endpoint_slope = -9.0;
    a2.points = 17;
    EXPECT_EQ(predict_winner(a2, b).winner, predict_winner(a, b).winner);
  }
}

}  // namespace
}  // namespace trustan
