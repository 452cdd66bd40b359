#pragma once

// Price scenarios for one trading day: the point forecast plus one
// residual-shifted copy per preceding history day.

#include <map>
#include <optional>
#include <vector>

#include "flexbid/common.hpp"

namespace flexbid::scenarios {

struct DayPrices {
  std::vector<double> realized;                 // EUR/MWh
  std::optional<std::vector<double>> forecast;  // EUR/MWh
};

/// Realized and forecast prices on a shared (date, hour) grid.
struct PriceSeries {
  std::map<Date, DayPrices> days;

  const DayPrices& at(Date d) const {
    auto it = days.find(d);
    if (it == days.end()) fail(ErrorCode::InsufficientHistory, "no prices for " + d.iso());
    return it->second;
  }

  bool contains(Date d) const { return days.count(d) != 0; }
};

struct ScenarioSet {
  Date day;
  std::vector<std::vector<double>> rows;  // S x T, EUR/MWh

  std::size_t size() const { return rows.size(); }
};

enum class WarmupPolicy {
  Strict,           // fewer than S-1 residual days is an error
  DuplicateOldest,  // pad with the oldest available residual
};

/// Residual days usable before d, most recent first.
inline std::vector<Date> residual_days(const PriceSeries& history, Date d) {
  std::vector<Date> out;
  for (auto it = history.days.lower_bound(d); it != history.days.begin();) {
    --it;
    if (it->second.forecast && !it->second.realized.empty()) out.push_back(it->first);
  }
  return out;
}

inline ScenarioSet generate_scenarios(Date d, int s_count, const PriceSeries& history,
                                      WarmupPolicy policy = WarmupPolicy::Strict) {
  if (s_count < 1) fail(ErrorCode::InvalidArgument, "scenario count must be >= 1");
  const DayPrices& today = history.at(d);
  if (!today.forecast) fail(ErrorCode::InsufficientHistory, "no point forecast for " + d.iso());
  const std::vector<double>& y = *today.forecast;

  ScenarioSet set;
  set.day = d;
  set.rows.reserve(s_count);
  set.rows.push_back(y);
  if (s_count == 1) return set;

  std::vector<Date> past = residual_days(history, d);
  const std::size_t needed = static_cast<std::size_t>(s_count - 1);
  if (past.size() < needed && (policy == WarmupPolicy::Strict || past.empty())) {
    fail(ErrorCode::InsufficientHistory,
         d.iso() + ": " + std::to_string(s_count) + " scenarios need " + std::to_string(needed) +
             " residual days, " + std::to_string(past.size()) + " available");
  }
  if (past.size() < needed) {
    log::info(d.iso() + ": padding scenarios with the oldest residual (" +
              past.back().iso() + ")");
  }
  for (std::size_t k = 0; k < needed; ++k) {
    const DayPrices& h = history.at(past[std::min(k, past.size() - 1)]);
    if (h.realized.size() != y.size() || h.forecast->size() != y.size())
      fail(ErrorCode::LengthMismatch, "residual day length differs from " + d.iso());
    std::vector<double> row(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) row[t] = y[t] - ((*h.forecast)[t] - h.realized[t]);
    set.rows.push_back(std::move(row));
  }
  return set;
}

/// Persistence forecast: realized prices of the latest prior day of the same
/// class (weekday follows the previous weekday, Saturday/Sunday follow the
/// previous Saturday/Sunday), else the latest prior day.
inline std::vector<double> naive_forecast(const PriceSeries& history, Date d) {
  const bool weekend = d.is_weekend();
  const unsigned wd = d.weekday();
  std::optional<Date> fallback;
  for (auto it = history.days.lower_bound(d); it != history.days.begin();) {
    --it;
    if (it->second.realized.empty()) continue;
    Date p = it->first;
    if (!fallback) fallback = p;
    bool match = weekend ? (p.weekday() == wd) : !p.is_weekend();
    if (match) return it->second.realized;
  }
  if (fallback) return history.at(*fallback).realized;
  fail(ErrorCode::InsufficientHistory, "no realized prices before " + d.iso());
}

/// Fills absent forecasts with the persistence forecast. Days without any
/// prior history stay without forecast. Returns the number of filled days.
inline int fill_missing_forecasts(PriceSeries& series) {
  int filled = 0;
  for (auto& [day, prices] : series.days) {
    if (prices.forecast) continue;
    if (series.days.begin()->first == day) continue;
    prices.forecast = naive_forecast(series, day);
    ++filled;
  }
  return filled;
}

}  // namespace flexbid::scenarios
