#include <gtest/gtest.h>

#include <random>

#include "flexbid/scenarios.hpp"

using namespace flexbid;
using namespace flexbid::scenarios;

namespace {

PriceSeries random_history(std::uint64_t seed, Date first, int days, int horizon = 24) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-20.0, 250.0);
  PriceSeries s;
  for (int i = 0; i < days; ++i) {
    DayPrices d;
    d.realized.resize(horizon);
    d.forecast.emplace(horizon);
    for (int t = 0; t < horizon; ++t) {
      d.realized[t] = u(rng);
      (*d.forecast)[t] = u(rng);
    }
    s.days.emplace(first + i, std::move(d));
  }
  return s;
}

}  // namespace

TEST(Scenarios, SingleScenarioIsForecast) {
  auto h = random_history(1, Date(2024, 10, 1), 3);
  Date d(2024, 10, 3);
  auto set = generate_scenarios(d, 1, h);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_EQ(set.rows[0], *h.at(d).forecast);
}

TEST(Scenarios, HandEvaluatedResidual) {
  PriceSeries h;
  h.days[Date(2024, 10, 1)] = {std::vector<double>(24, 45.0), std::vector<double>(24, 40.0)};
  h.days[Date(2024, 10, 2)] = {std::vector<double>(24, 0.0), std::vector<double>(24, 50.0)};
  auto set = generate_scenarios(Date(2024, 10, 2), 2, h);
  ASSERT_EQ(set.size(), 2u);
  for (double v : set.rows[1]) EXPECT_DOUBLE_EQ(v, 55.0);
}

TEST(Scenarios, PerfectHistoryGivesIdenticalRows) {
  auto h = random_history(2, Date(2024, 10, 1), 6);
  for (auto& [d, p] : h.days) p.forecast = p.realized;
  Date d(2024, 10, 6);
  h.days[d].forecast = std::vector<double>(24, 70.0);
  auto set = generate_scenarios(d, 5, h);
  for (const auto& row : set.rows) EXPECT_EQ(row, set.rows[0]);
}

TEST(Scenarios, RowsReconstructOneResidualEach) {
  Date first(2024, 10, 1);
  auto h = random_history(3, first, 10);
  Date d = first + 9;
  auto set = generate_scenarios(d, 6, h);
  const auto& y = *h.at(d).forecast;
  for (int k = 1; k < 6; ++k) {
    const auto& past = h.at(d - k);
    for (int t = 0; t < 24; ++t)
      EXPECT_NEAR(set.rows[k][t], y[t] - ((*past.forecast)[t] - past.realized[t]), 1e-12);
  }
}

TEST(Scenarios, PrefixNested) {
  Date first(2024, 10, 1);
  auto h = random_history(4, first, 30);
  Date d = first + 29;
  auto big = generate_scenarios(d, 24, h);
  for (int s : {1, 2, 4, 8, 16}) {
    auto small = generate_scenarios(d, s, h);
    for (int k = 0; k < s; ++k) EXPECT_EQ(small.rows[k], big.rows[k]);
  }
}

TEST(Scenarios, SkipsCalendarGaps) {
  Date first(2024, 10, 1);
  auto h = random_history(5, first, 6);
  h.days.erase(first + 4);
  Date d = first + 5;
  auto set = generate_scenarios(d, 2, h);
  const auto& prev = h.at(first + 3);
  EXPECT_NEAR(set.rows[1][0], (*h.at(d).forecast)[0] - ((*prev.forecast)[0] - prev.realized[0]), 1e-12);
}

TEST(Scenarios, WarmupPolicies) {
  Date first(2024, 10, 1);
  auto h = random_history(6, first, 3);
  Date d = first + 2;
  try {
    generate_scenarios(d, 5, h, WarmupPolicy::Strict);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientHistory);
  }
  auto set = generate_scenarios(d, 5, h, WarmupPolicy::DuplicateOldest);
  ASSERT_EQ(set.size(), 5u);
  EXPECT_EQ(set.rows[2], set.rows[3]);
  EXPECT_EQ(set.rows[2], set.rows[4]);
  EXPECT_NE(set.rows[1], set.rows[2]);
}

TEST(Scenarios, NegativePricesPassThrough) {
  PriceSeries h;
  h.days[Date(2024, 10, 1)] = {std::vector<double>(24, -30.0), std::vector<double>(24, 10.0)};
  h.days[Date(2024, 10, 2)] = {std::vector<double>(24, 0.0), std::vector<double>(24, -5.0)};
  auto set = generate_scenarios(Date(2024, 10, 2), 2, h);
  EXPECT_DOUBLE_EQ(set.rows[0][0], -5.0);
  EXPECT_DOUBLE_EQ(set.rows[1][0], -45.0);
}

TEST(NaiveForecast, SinglePriorDay) {
  PriceSeries h;
  h.days[Date(2024, 10, 5)] = {std::vector<double>(24, 33.0), std::nullopt};
  EXPECT_EQ(naive_forecast(h, Date(2024, 10, 8)), std::vector<double>(24, 33.0));
}

TEST(NaiveForecast, WeekdayClassRule) {
  PriceSeries h;
  h.days[Date(2024, 10, 4)] = {std::vector<double>(24, 1.0), std::nullopt};  // Friday
  h.days[Date(2024, 10, 6)] = {std::vector<double>(24, 2.0), std::nullopt};  // Sunday
  EXPECT_EQ(naive_forecast(h, Date(2024, 10, 7))[0], 1.0);                   // Monday -> Friday
  h.days[Date(2024, 10, 5)] = {std::vector<double>(24, 3.0), std::nullopt};  // Saturday
  EXPECT_EQ(naive_forecast(h, Date(2024, 10, 12))[0], 3.0);                  // Saturday -> Saturday
  EXPECT_EQ(naive_forecast(h, Date(2024, 10, 13))[0], 2.0);                  // Sunday -> Sunday
}

TEST(NaiveForecast, ConstantHistoryAndNoHistory) {
  PriceSeries h;
  for (int i = 0; i < 10; ++i) h.days[Date(2024, 10, 1) + i] = {std::vector<double>(24, 42.0), std::nullopt};
  EXPECT_EQ(naive_forecast(h, Date(2024, 10, 11)), std::vector<double>(24, 42.0));
  EXPECT_THROW(naive_forecast(h, Date(2024, 10, 1)), Error);
}

TEST(NaiveForecast, FillSkipsFirstDay) {
  PriceSeries h;
  for (int i = 0; i < 4; ++i) h.days[Date(2024, 10, 1) + i] = {std::vector<double>(24, 10.0 + i), std::nullopt};
  EXPECT_EQ(fill_missing_forecasts(h), 3);
  EXPECT_FALSE(h.at(Date(2024, 10, 1)).forecast.has_value());
  EXPECT_EQ((*h.at(Date(2024, 10, 4)).forecast)[0], 12.0);
}
