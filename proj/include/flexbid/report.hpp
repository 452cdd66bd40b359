#pragma once

// Parameter sweeps behind the report tables: efficiency and runtime against
// the number of bids and the HP share, and daily savings against volatility.

#include <string>
#include <vector>

#include "flexbid/common.hpp"
#include "flexbid/instance.hpp"
#include "flexbid/simulate.hpp"

namespace flexbid::report {

struct BidsRow {
  int bids = 0;
  double eta_weighted = simulate::nan;
  double eta_mean = simulate::nan;
  double tc_cleared_eur = 0.0;
  double savings_eur = 0.0;
  double runtime_dispatch_s = 0.0;
  double runtime_clearing_s = 0.0;
};

/// Efficiency against B with S = B and prefix-nested scenario sets. Scenario
/// dispatch runs once at the largest B; smaller B reuse its prefixes, and the
/// dispatch runtime is apportioned by scenario count.
inline std::vector<BidsRow> efficiency_vs_bids(const CampaignConfig& base, const Instance& inst,
                                               const std::vector<int>& bids) {
  if (bids.empty()) return {};
  int b_max = *std::max_element(bids.begin(), bids.end());
  CampaignConfig full = base;
  full.scenarios = b_max;
  full.max_bids = b_max;
  full.inject_realized = false;
  simulate::Prepared p = simulate::prepare(full, inst);

  std::vector<simulate::CampaignReport> reps(bids.size());
  for (Date d : full.days()) {
    try {
      simulate::DayContext ctx = simulate::make_day_context(full, inst, d, p.buildings, p.allocation ? &*p.allocation : nullptr);
      simulate::Costs inf = simulate::inflexible_cost(full, ctx);
      simulate::DayBid bid = simulate::bid_day(full, inst, ctx);
      std::optional<simulate::Costs> opt;
      if (bid.eg) opt = simulate::perfect_foresight_cost(full, ctx);
      for (std::size_t i = 0; i < bids.size(); ++i) {
        CampaignConfig c = full;
        c.scenarios = c.max_bids = bids[i];
        simulate::DayBid prefix = simulate::scenario_prefix(c, bid, bids[i]);
        reps[i].days.push_back(simulate::settle(c, ctx, prefix, inf, opt));
      }
    } catch (const Error& e) {
      log::warn(d.iso() + ": " + e.what());
      for (auto& r : reps) r.failures.push_back({d, e.code(), e.what()});
    }
  }
  std::vector<BidsRow> out;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    simulate::summarize(reps[i]);
    out.push_back({bids[i], reps[i].eta_weighted, reps[i].eta_mean, reps[i].tc_cleared, reps[i].savings_eur,
                   reps[i].runtime_dispatch_s, reps[i].runtime_clearing_s});
  }
  return out;
}

/// Runtime against B measured with independent campaigns (S = B each).
inline std::vector<BidsRow> runtime_vs_bids(const CampaignConfig& base, const Instance& inst,
                                            const std::vector<int>& bids) {
  std::vector<BidsRow> out;
  for (int b : bids) {
    CampaignConfig c = base;
    c.scenarios = c.max_bids = b;
    simulate::CampaignReport r = simulate::run_campaign(c, inst);
    out.push_back({b, r.eta_weighted, r.eta_mean, r.tc_cleared, r.savings_eur, r.runtime_dispatch_s, r.runtime_clearing_s});
  }
  return out;
}

struct ShareRow {
  double share_pct = 0.0;
  int hp_count = 0;
  double eta_weighted = simulate::nan;
  double eta_mean = simulate::nan;
  double tc_inf_eur = 0.0;
  double tc_cleared_eur = 0.0;
  double tc_opt_eur = 0.0;
  double tc_inf_hp_eur = 0.0;
  double tc_cleared_hp_eur = 0.0;
  double savings_eur = 0.0;
  double savings_per_hp_eur = simulate::nan;
  double shed_kwh = 0.0;
  double runtime_dispatch_s = 0.0;
  double runtime_clearing_s = 0.0;
};

inline std::vector<ShareRow> sweep_shares(const CampaignConfig& base, const Instance& inst,
                                          const std::vector<double>& shares) {
  std::vector<ShareRow> out;
  for (double share : shares) {
    CampaignConfig c = base;
    c.hp_share_pct = share;
    c.hp_buildings.reset();
    simulate::CampaignReport r = simulate::run_campaign(c, inst);
    out.push_back({share, r.hp_count, r.eta_weighted, r.eta_mean, r.tc_inf, r.tc_cleared, r.tc_opt, r.tc_inf_hp,
                   r.tc_cleared_hp, r.savings_eur, r.savings_per_hp_eur, r.shed_kwh, r.runtime_dispatch_s,
                   r.runtime_clearing_s});
  }
  return out;
}

inline std::string format_bids(const std::vector<BidsRow>& rows) {
  std::string s = "bids,eta_weighted,eta_mean,tc_cleared_eur,savings_eur,runtime_dispatch_s,runtime_clearing_s\n";
  for (const auto& r : rows)
    s += std::to_string(r.bids) + "," + format_double(r.eta_weighted) + "," + format_double(r.eta_mean) + "," +
         format_double(r.tc_cleared_eur) + "," + format_double(r.savings_eur) + "," +
         format_double(r.runtime_dispatch_s) + "," + format_double(r.runtime_clearing_s) + "\n";
  return s;
}

inline std::string format_shares(const std::vector<ShareRow>& rows) {
  std::string s =
      "hp_share_pct,hp_count,eta_weighted,eta_mean,tc_inf_eur,tc_cleared_eur,tc_opt_eur,tc_inf_hp_eur,"
      "tc_cleared_hp_eur,savings_eur,savings_per_hp_eur,shed_kwh,runtime_dispatch_s,runtime_clearing_s\n";
  for (const auto& r : rows)
    s += format_double(r.share_pct) + "," + std::to_string(r.hp_count) + "," + format_double(r.eta_weighted) + "," +
         format_double(r.eta_mean) + "," + format_double(r.tc_inf_eur) + "," + format_double(r.tc_cleared_eur) + "," +
         format_double(r.tc_opt_eur) + "," + format_double(r.tc_inf_hp_eur) + "," +
         format_double(r.tc_cleared_hp_eur) + "," + format_double(r.savings_eur) + "," +
         format_double(r.savings_per_hp_eur) + "," + format_double(r.shed_kwh) + "," +
         format_double(r.runtime_dispatch_s) + "," + format_double(r.runtime_clearing_s) + "\n";
  return s;
}

inline std::string format_runtime_vs_share(const std::vector<ShareRow>& rows) {
  std::string s = "hp_share_pct,hp_count,runtime_dispatch_s,runtime_clearing_s\n";
  for (const auto& r : rows)
    s += format_double(r.share_pct) + "," + std::to_string(r.hp_count) + "," + format_double(r.runtime_dispatch_s) +
         "," + format_double(r.runtime_clearing_s) + "\n";
  return s;
}

/// One row per simulated day: daily price spread and the savings realized.
inline std::string format_savings_vs_volatility(const simulate::CampaignReport& rep) {
  std::string s = "date,price_std_eur_mwh,savings_eur,savings_per_hp_eur,eta\n";
  for (const auto& d : rep.days) {
    double saving = d.tc_inf - d.tc_cleared;
    double per_hp = rep.hp_count > 0 ? saving / rep.hp_count : simulate::nan;
    s += d.day.iso() + "," + format_double(d.price_std) + "," + format_double(saving) + "," + format_double(per_hp) +
         "," + format_double(d.eta) + "\n";
  }
  return s;
}

}  // namespace flexbid::report
