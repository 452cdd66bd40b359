#pragma once

// In-memory instance data and campaign configuration shared by the
// orchestration and I/O layers.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "flexbid/bidding.hpp"
#include "flexbid/common.hpp"
#include "flexbid/grid.hpp"
#include "flexbid/lp.hpp"
#include "flexbid/scenarios.hpp"
#include "flexbid/thermal.hpp"

namespace flexbid {

enum class UtilityMode { Unbundled, Integrated };

inline std::string to_string(UtilityMode m) { return m == UtilityMode::Unbundled ? "unbundled" : "integrated"; }

inline UtilityMode parse_mode(const std::string& s) {
  if (s == "unbundled") return UtilityMode::Unbundled;
  if (s == "integrated") return UtilityMode::Integrated;
  fail(ErrorCode::InvalidArgument, "mode must be unbundled or integrated, got '" + s + "'");
}

struct CampaignConfig {
  Date start{2024, 10, 1};
  Date end{2024, 10, 30};  // inclusive
  int scenarios = 24;
  int max_bids = bidding::default_max_bids;
  UtilityMode mode = UtilityMode::Unbundled;
  bidding::PricingMode pricing = bidding::PricingMode::mabp();
  std::optional<double> hp_share_pct;                   // overrides has_hp when set
  std::optional<std::vector<std::string>> hp_buildings;  // explicit subset, overrides share
  std::uint64_t seed = 1;
  bool inject_realized = false;  // append the realized prices as an extra scenario
  scenarios::WarmupPolicy warmup = scenarios::WarmupPolicy::DuplicateOldest;
  thermal::ComfortConfig comfort;
  grid::GridSettings grid;
  double s_base_kva = 1000.0;
  double v_base_kv = 0.4;
  lp::SolverOptions solver;

  void validate() const {
    if (scenarios < 1) fail(ErrorCode::InvalidArgument, "scenarios must be >= 1");
    if (max_bids < 1) fail(ErrorCode::InvalidArgument, "max_bids must be >= 1");
    if (end < start) fail(ErrorCode::InvalidArgument, "date range is empty");
    if (hp_share_pct && !(*hp_share_pct > 0.0 && *hp_share_pct <= 100.0))
      fail(ErrorCode::InvalidArgument, "HP share must lie in (0, 100]");
    comfort.validate();
  }

  std::vector<Date> days() const {
    std::vector<Date> out;
    for (Date d = start; d <= end; d = d + 1) out.push_back(d);
    return out;
  }
};

struct Instance {
  std::vector<thermal::BuildingParams> buildings;
  std::map<Date, std::vector<double>> weather;  // outdoor °C per hour
  scenarios::PriceSeries prices;
  std::optional<grid::RadialNetwork> network;
  std::map<Date, grid::GridTimeSeries> profiles;
  std::optional<grid::AllocationResult> allocation;

  const std::vector<double>& t_out(Date d) const {
    auto it = weather.find(d);
    if (it == weather.end()) fail(ErrorCode::GridMismatch, "no weather for " + d.iso());
    return it->second;
  }
};

/// Seeded permutation of building positions. Prefixes of one permutation
/// nest, so a larger HP share always contains every smaller share's set.
inline std::vector<std::size_t> hp_rollout_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

inline std::size_t hp_count_for_share(std::size_t n, double share_pct) {
  return static_cast<std::size_t>(std::llround(share_pct / 100.0 * static_cast<double>(n)));
}

/// Applies the campaign's HP selection to a copy of the building list.
inline std::vector<thermal::BuildingParams> select_hp_buildings(
    std::vector<thermal::BuildingParams> buildings, const CampaignConfig& cfg) {
  if (cfg.hp_buildings) {
    std::set<std::string> chosen(cfg.hp_buildings->begin(), cfg.hp_buildings->end());
    for (const auto& id : chosen) {
      bool found = false;
      for (const auto& b : buildings) found = found || b.id == id;
      if (!found) fail(ErrorCode::DanglingReference, "HP subset names unknown building '" + id + "'");
    }
    for (auto& b : buildings) b.has_hp = chosen.count(b.id) != 0;
  } else if (cfg.hp_share_pct) {
    auto order = hp_rollout_order(buildings.size(), cfg.seed);
    std::size_t k = hp_count_for_share(buildings.size(), *cfg.hp_share_pct);
    for (auto& b : buildings) b.has_hp = false;
    for (std::size_t i = 0; i < k; ++i) buildings[order[i]].has_hp = true;
  }
  return buildings;
}

}  // namespace flexbid
