#pragma once

// Aggregation and bid determination: per-scenario resource schedules are
// summed into block bids of one exclusive group. The ledger keeps every
// resource's schedule per scenario so that disaggregation is a lookup.

#include <map>
#include <string>
#include <vector>

#include "flexbid/common.hpp"

namespace flexbid::bidding {

inline constexpr double default_voll_eur_mwh = 10000.0;
inline constexpr double default_mabp_eur_mwh = 4000.0;
inline constexpr int default_max_bids = 24;

/// Bids whose aggregate profiles differ by at most this much per hour are
/// treated as the same profile.
inline constexpr double duplicate_tolerance_mw = 1e-9;

struct BlockBid {
  PowerProfile profile_mw;  // positive = consumption
  double price_eur = 0.0;   // willingness to pay for the whole block
};

struct ExclusiveGroup {
  std::vector<BlockBid> bids;
  int max_bids = default_max_bids;

  std::size_t size() const { return bids.size(); }
};

struct PricingMode {
  enum class Kind { Truthful, Mabp };

  Kind kind = Kind::Mabp;
  double price_cap_eur_mwh = default_mabp_eur_mwh;
  double voll_eur_mwh = default_voll_eur_mwh;

  static PricingMode truthful(double voll = default_voll_eur_mwh) {
    return {Kind::Truthful, default_mabp_eur_mwh, voll};
  }
  static PricingMode mabp(double cap = default_mabp_eur_mwh) {
    return {Kind::Mabp, cap, default_voll_eur_mwh};
  }

  std::string name() const { return kind == Kind::Truthful ? "truthful" : "mabp"; }
};

/// One resource's optimal schedule under one scenario.
struct ResourceSchedule {
  std::string id;
  PowerProfile schedule_kw;
  double e_base_kwh = 0.0;
};

/// Schedules of all resources under one price scenario, in resource order.
using ScenarioSchedules = std::vector<ResourceSchedule>;

struct BidLedger {
  std::vector<std::string> resource_ids;
  std::vector<std::vector<PowerProfile>> schedules_kw;  // [scenario][resource]
  std::vector<PowerProfile> aggregate_mw;               // [scenario]
  std::vector<double> price_eur;                        // [scenario]
  std::vector<std::vector<int>> bid_scenarios;          // [bid] contributing scenarios, ascending
  double dt = 1.0;

  std::size_t num_scenarios() const { return aggregate_mw.size(); }
  std::size_t num_bids() const { return bid_scenarios.size(); }
  /// Scenario whose per-resource schedules back a bid.
  int representative(std::size_t bid) const { return bid_scenarios.at(bid).front(); }
};

struct GroupBuild {
  ExclusiveGroup group;
  BidLedger ledger;
};

inline GroupBuild build_exclusive_group(const std::vector<ScenarioSchedules>& schedules,
                                        const PricingMode& mode, int max_bids = default_max_bids,
                                        double dt = 1.0) {
  if (schedules.empty()) fail(ErrorCode::EmptyInput, "no scenarios to aggregate");
  if (schedules.front().empty()) fail(ErrorCode::EmptyInput, "no resources to aggregate");
  if (max_bids < 1) fail(ErrorCode::InvalidArgument, "max_bids must be >= 1");
  if (mode.kind == PricingMode::Kind::Mabp && !(mode.price_cap_eur_mwh > 0.0))
    fail(ErrorCode::InvalidArgument, "price cap must be positive");

  const std::size_t resources = schedules.front().size();
  const std::size_t horizon = schedules.front().front().schedule_kw.size();

  GroupBuild out;
  BidLedger& ledger = out.ledger;
  ledger.dt = dt;
  for (const auto& r : schedules.front()) ledger.resource_ids.push_back(r.id);

  double e_base_total_kwh = 0.0;
  for (const auto& r : schedules.front()) e_base_total_kwh += r.e_base_kwh;

  for (std::size_t s = 0; s < schedules.size(); ++s) {
    const ScenarioSchedules& scen = schedules[s];
    if (scen.size() != resources)
      fail(ErrorCode::LengthMismatch, "scenario " + std::to_string(s) + " lacks resources");
    std::vector<PowerProfile> per_resource;
    per_resource.reserve(resources);
    PowerProfile agg_kw(horizon, 0.0);
    for (std::size_t r = 0; r < resources; ++r) {
      if (scen[r].id != ledger.resource_ids[r])
        fail(ErrorCode::LengthMismatch, "scenario " + std::to_string(s) + " resource order differs");
      if (scen[r].schedule_kw.size() != horizon)
        fail(ErrorCode::LengthMismatch, "resource " + scen[r].id + " schedule length differs");
      for (std::size_t t = 0; t < horizon; ++t) agg_kw[t] += scen[r].schedule_kw[t];
      per_resource.push_back(scen[r].schedule_kw);
    }
    PowerProfile agg_mw(horizon);
    for (std::size_t t = 0; t < horizon; ++t) agg_mw[t] = units::kw_to_mw(agg_kw[t]);

    double price = 0.0;
    if (mode.kind == PricingMode::Kind::Truthful) {
      price = mode.voll_eur_mwh * dt * sum(agg_mw);
    } else {
      price = mode.price_cap_eur_mwh * units::kw_to_mw(e_base_total_kwh);
    }
    ledger.schedules_kw.push_back(std::move(per_resource));
    ledger.aggregate_mw.push_back(std::move(agg_mw));
    ledger.price_eur.push_back(price);
  }

  // Scenarios in ascending order; a profile already in the group absorbs
  // later duplicates.
  for (std::size_t s = 0; s < ledger.num_scenarios(); ++s) {
    bool merged = false;
    for (std::size_t b = 0; b < ledger.bid_scenarios.size(); ++b) {
      int rep = ledger.bid_scenarios[b].front();
      if (max_abs_diff(ledger.aggregate_mw[s], ledger.aggregate_mw[rep]) <= duplicate_tolerance_mw &&
          std::abs(ledger.price_eur[s] - ledger.price_eur[rep]) <= 1e-9 * std::max(1.0, std::abs(ledger.price_eur[rep]))) {
        ledger.bid_scenarios[b].push_back(static_cast<int>(s));
        merged = true;
        break;
      }
    }
    if (!merged) ledger.bid_scenarios.push_back({static_cast<int>(s)});
  }
  if (ledger.num_bids() > static_cast<std::size_t>(max_bids)) {
    fail(ErrorCode::TooManyBids, std::to_string(ledger.num_bids()) +
                                     " distinct profiles exceed the limit of " +
                                     std::to_string(max_bids) + " bids");
  }

  out.group.max_bids = max_bids;
  for (std::size_t b = 0; b < ledger.num_bids(); ++b) {
    int rep = ledger.representative(b);
    out.group.bids.push_back({ledger.aggregate_mw[rep], ledger.price_eur[rep]});
  }
  return out;
}

/// Per-resource schedules implied by the acceptance rates: each resource
/// follows the same convex combination of its own scenario schedules.
inline std::map<std::string, PowerProfile> disaggregate(const BidLedger& ledger,
                                                        std::span<const double> alpha) {
  if (alpha.size() != ledger.num_bids())
    fail(ErrorCode::LengthMismatch, "acceptance vector has " + std::to_string(alpha.size()) +
                                        " entries for " + std::to_string(ledger.num_bids()) + " bids");
  double total = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::AlphaOutOfRange, "acceptance rate " + format_double(a) + " outside [0, 1]");
    total += a;
  }
  if (total > 1.0 + 1e-9) fail(ErrorCode::AlphaOutOfRange, "acceptance rates sum to " + format_double(total));

  const std::size_t horizon = ledger.aggregate_mw.empty() ? 0 : ledger.aggregate_mw.front().size();
  std::map<std::string, PowerProfile> out;
  for (std::size_t r = 0; r < ledger.resource_ids.size(); ++r) {
    PowerProfile p(horizon, 0.0);
    for (std::size_t b = 0; b < alpha.size(); ++b) {
      if (alpha[b] == 0.0) continue;
      const PowerProfile& x = ledger.schedules_kw[ledger.representative(b)][r];
      for (std::size_t t = 0; t < horizon; ++t) p[t] += alpha[b] * x[t];
    }
    out.emplace(ledger.resource_ids[r], std::move(p));
  }
  return out;
}

}  // namespace flexbid::bidding
