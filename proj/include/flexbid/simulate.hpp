#pragma once

// Rolling day-ahead campaign: scenarios -> dispatch -> exclusive group ->
// clearing at realized prices -> disaggregation, benchmarked against the
// inflexible baseline and the perfect-foresight optimum.

#include <chrono>
#include <cmath>
#include <limits>
#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flexbid/bidding.hpp"
#include "flexbid/clearing.hpp"
#include "flexbid/common.hpp"
#include "flexbid/grid.hpp"
#include "flexbid/instance.hpp"
#include "flexbid/scenarios.hpp"
#include "flexbid/thermal.hpp"

namespace flexbid::simulate {

inline constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Realized share of the achievable savings; NaN when nothing was
/// achievable (tc_inf - tc_opt < 1e-9).
inline double efficiency(double tc_inf, double tc_cleared, double tc_opt) {
  if (tc_opt > tc_inf + 1e-6)
    fail(ErrorCode::InvalidOrdering, "optimal cost " + format_double(tc_opt) + " exceeds inflexible cost " + format_double(tc_inf));
  if (tc_inf - tc_opt < 1e-9) return nan;
  return (tc_inf - tc_cleared) / (tc_inf - tc_opt);
}

/// Everything about one day that does not depend on the price scenario.
struct DayContext {
  Date day;
  std::vector<double> t_out;
  std::vector<double> realized;
  std::vector<thermal::BuildingParams> flexible;     // HP buildings with feasible baseline
  std::vector<thermal::DispatchResult> baselines;    // aligned with `flexible`
  std::vector<std::string> excluded;                 // infeasible baseline, carried as fixed load
  PowerProfile excluded_kw;                          // their summed capped profile
  std::optional<grid::GridDay> grid_day;             // integrated mode only
};

inline DayContext make_day_context(const CampaignConfig& cfg, const Instance& inst, Date d,
                                   const std::vector<thermal::BuildingParams>& buildings,
                                   const grid::AllocationResult* alloc) {
  DayContext ctx;
  ctx.day = d;
  ctx.t_out = inst.t_out(d);
  ctx.realized = inst.prices.at(d).realized;
  const std::size_t horizon = cfg.comfort.horizon;
  if (ctx.t_out.size() != horizon || ctx.realized.size() != horizon)
    fail(ErrorCode::GridMismatch, d.iso() + ": day inputs do not span the horizon");

  if (cfg.mode == UtilityMode::Integrated) {
    if (!inst.network) fail(ErrorCode::InvalidArgument, "integrated mode needs a network");
    if (!alloc) fail(ErrorCode::InvalidArgument, "integrated mode needs an allocation");
    auto it = inst.profiles.find(d);
    if (it == inst.profiles.end()) fail(ErrorCode::GridMismatch, "no load/PV profile for " + d.iso());
    grid::RadialNetwork net = *inst.network;
    net.s_base_kva = cfg.s_base_kva;
    net.v_base_kv = cfg.v_base_kv;
    ctx.grid_day = grid::prepare_grid_day(net, buildings, *alloc, cfg.comfort, ctx.t_out, it->second, cfg.grid);
    for (const auto& fb : ctx.grid_day->flexible) {
      ctx.flexible.push_back(fb.params);
      ctx.baselines.push_back(fb.baseline);
    }
    ctx.excluded = ctx.grid_day->excluded;
    ctx.excluded_kw.assign(horizon, 0.0);
    for (const auto& node : ctx.grid_day->excluded_hp_kw)
      for (std::size_t t = 0; t < horizon; ++t) ctx.excluded_kw[t] += node[t];
    return ctx;
  }

  ctx.excluded_kw.assign(horizon, 0.0);
  for (const auto& b : buildings) {
    if (!b.has_hp) continue;
    try {
      ctx.baselines.push_back(thermal::baseline_profile(b, cfg.comfort, ctx.t_out));
      ctx.flexible.push_back(b);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleBaseline) throw;
      log::warn(d.iso() + ": " + e.what() + "; carried as fixed load");
      ctx.excluded.push_back(b.id);
      PowerProfile capped = thermal::capped_baseline(b, cfg.comfort, ctx.t_out);
      for (std::size_t t = 0; t < horizon; ++t) ctx.excluded_kw[t] += capped[t];
    }
  }
  return ctx;
}

/// Output of the bidding stage for one day.
struct DayBid {
  scenarios::ScenarioSet scenarios;
  std::vector<bidding::ScenarioSchedules> schedules;  // [scenario][resource]
  std::vector<grid::OpfSolution> opf;                 // [scenario], integrated mode
  std::optional<bidding::GroupBuild> eg;              // absent without flexible resources
  double dispatch_s = 0.0;
};

/// Optimal schedules of all flexible resources at one price vector.
struct PriceResponse {
  bidding::ScenarioSchedules schedules;
  std::optional<grid::OpfSolution> opf;
};

inline PriceResponse respond(const CampaignConfig& cfg, const DayContext& ctx, std::span<const double> prices) {
  PriceResponse out;
  if (cfg.mode == UtilityMode::Integrated) {
    out.opf = grid::integrated_dispatch(*ctx.grid_day, prices, grid::Flexibility::Flexible, cfg.solver);
    for (std::size_t i = 0; i < ctx.flexible.size(); ++i)
      out.schedules.push_back({ctx.flexible[i].id, out.opf->buildings[i].schedule_kw, ctx.baselines[i].energy_kwh});
    return out;
  }
  for (std::size_t i = 0; i < ctx.flexible.size(); ++i) {
    thermal::DispatchResult r = thermal::dispatch(ctx.flexible[i], cfg.comfort, ctx.t_out, prices,
                                                  ctx.baselines[i].energy_kwh, cfg.solver);
    out.schedules.push_back({ctx.flexible[i].id, std::move(r.schedule_kw), ctx.baselines[i].energy_kwh});
  }
  return out;
}

inline scenarios::ScenarioSet day_scenarios(const CampaignConfig& cfg, const Instance& inst, const DayContext& ctx) {
  scenarios::ScenarioSet set = scenarios::generate_scenarios(ctx.day, cfg.scenarios, inst.prices, cfg.warmup);
  if (cfg.inject_realized) set.rows.push_back(ctx.realized);
  return set;
}

inline DayBid bid_day(const CampaignConfig& cfg, const Instance& inst, const DayContext& ctx) {
  DayBid out;
  out.scenarios = day_scenarios(cfg, inst, ctx);
  if (ctx.flexible.empty()) return out;
  auto t0 = std::chrono::steady_clock::now();
  for (const auto& row : out.scenarios.rows) {
    PriceResponse r = respond(cfg, ctx, row);
    out.schedules.push_back(std::move(r.schedules));
    if (r.opf) out.opf.push_back(std::move(*r.opf));
  }
  out.dispatch_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.eg = bidding::build_exclusive_group(out.schedules, cfg.pricing, cfg.max_bids, cfg.comfort.dt);
  return out;
}

/// Cost triple with the HP-only decomposition alongside.
struct Costs {
  double total = 0.0;
  double hp = 0.0;
};

/// TC^inf: baseline schedules priced at the realized prices (integrated:
/// shedding-optimal OPF with flexibility switched off).
inline Costs inflexible_cost(const CampaignConfig& cfg, const DayContext& ctx) {
  const double dt = cfg.comfort.dt;
  double excluded = thermal::schedule_cost(ctx.excluded_kw, ctx.realized, dt);
  if (cfg.mode == UtilityMode::Integrated) {
    grid::OpfSolution s = grid::integrated_dispatch(*ctx.grid_day, ctx.realized, grid::Flexibility::Inflexible, cfg.solver);
    Costs c{s.objective_eur, excluded};
    for (const auto& b : s.buildings) c.hp += b.cost_eur;
    return c;
  }
  Costs c{excluded, excluded};
  for (const auto& b : ctx.baselines) c.total += thermal::schedule_cost(b.schedule_kw, ctx.realized, dt);
  c.hp = c.total;
  return c;
}

/// TC^opt: the mode's dispatch problem solved at the realized prices.
inline Costs perfect_foresight_cost(const CampaignConfig& cfg, const DayContext& ctx) {
  const double dt = cfg.comfort.dt;
  double excluded = thermal::schedule_cost(ctx.excluded_kw, ctx.realized, dt);
  if (cfg.mode == UtilityMode::Integrated) {
    grid::OpfSolution s = grid::integrated_dispatch(*ctx.grid_day, ctx.realized, grid::Flexibility::Flexible, cfg.solver);
    Costs c{s.objective_eur, excluded};
    for (const auto& b : s.buildings) c.hp += b.cost_eur;
    return c;
  }
  Costs c{excluded, excluded};
  PriceResponse r = respond(cfg, ctx, ctx.realized);
  for (const auto& s : r.schedules) c.total += thermal::schedule_cost(s.schedule_kw, ctx.realized, dt);
  c.hp = c.total;
  return c;
}

struct DayResult {
  Date day;
  double tc_inf = 0.0, tc_cleared = 0.0, tc_opt = 0.0;
  double tc_inf_hp = 0.0, tc_cleared_hp = 0.0, tc_opt_hp = 0.0;
  double eta = nan;
  int num_scenarios = 0;
  int num_bids = 0;
  int accepted_bid = -1;
  bool fallback = false;  // group rejected, baseline executed
  std::vector<double> alpha;
  std::map<std::string, PowerProfile> awarded_kw;
  double shed_kwh = 0.0;
  double price_std = 0.0;  // population std-dev of realized hourly prices
  int flexible_count = 0;
  std::vector<std::string> excluded;
  double runtime_dispatch_s = 0.0;
  double runtime_clearing_s = 0.0;
};

/// Keeps the first `b` scenarios of a day's bidding stage and rebuilds the
/// group from them. Scenario sets are prefix-nested, so this equals bidding
/// with `b` scenarios from the start.
inline DayBid scenario_prefix(const CampaignConfig& cfg, const DayBid& full, int b) {
  DayBid out;
  out.scenarios.day = full.scenarios.day;
  std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(b), full.scenarios.size());
  out.scenarios.rows.assign(full.scenarios.rows.begin(), full.scenarios.rows.begin() + n);
  if (!full.eg) return out;
  out.schedules.assign(full.schedules.begin(), full.schedules.begin() + n);
  if (!full.opf.empty()) out.opf.assign(full.opf.begin(), full.opf.begin() + n);
  out.dispatch_s = full.dispatch_s * static_cast<double>(n) / static_cast<double>(full.scenarios.size());
  out.eg = bidding::build_exclusive_group(out.schedules, cfg.pricing, cfg.max_bids, cfg.comfort.dt);
  return out;
}

/// Clears a day's group at the realized prices and books the three costs.
inline DayResult settle(const CampaignConfig& cfg, const DayContext& ctx, const DayBid& bid, const Costs& inf,
                        const std::optional<Costs>& opt) {
  const double dt = cfg.comfort.dt;
  DayResult res;
  res.day = ctx.day;
  res.price_std = stddev(ctx.realized);
  res.flexible_count = static_cast<int>(ctx.flexible.size());
  res.excluded = ctx.excluded;
  res.num_scenarios = static_cast<int>(bid.scenarios.size());
  res.runtime_dispatch_s = bid.dispatch_s;

  if (!bid.eg || !opt) {
    // Nothing flexible: all three costs coincide.
    res.tc_inf = res.tc_cleared = res.tc_opt = inf.total;
    res.tc_inf_hp = res.tc_cleared_hp = res.tc_opt_hp = inf.hp;
    return res;
  }

  auto t0 = std::chrono::steady_clock::now();
  const bidding::GroupBuild& eg = *bid.eg;
  clearing::ClearingOutcome outcome = clearing::clear(eg.group, ctx.realized, dt);
  res.num_bids = static_cast<int>(eg.group.size());
  res.alpha = outcome.alpha;
  res.accepted_bid = outcome.accepted_bid();
  double accepted = 0.0;
  for (double a : outcome.alpha) accepted += a;

  double excluded_cost = thermal::schedule_cost(ctx.excluded_kw, ctx.realized, dt);
  if (accepted <= 0.0) {
    res.fallback = true;
    log::warn(ctx.day.iso() + ": exclusive group rejected, executing baseline schedules");
    for (std::size_t i = 0; i < ctx.flexible.size(); ++i)
      res.awarded_kw[ctx.flexible[i].id] = ctx.baselines[i].schedule_kw;
    res.tc_cleared = inf.total;
    res.tc_cleared_hp = inf.hp;
  } else {
    res.awarded_kw = bidding::disaggregate(eg.ledger, outcome.alpha);
    double hp = excluded_cost;
    for (const auto& [id, sched] : res.awarded_kw) hp += thermal::schedule_cost(sched, ctx.realized, dt);
    res.tc_cleared_hp = hp;
    if (cfg.mode == UtilityMode::Integrated) {
      double total = 0.0, shed = 0.0;
      for (std::size_t b = 0; b < outcome.alpha.size(); ++b) {
        if (outcome.alpha[b] == 0.0) continue;
        const grid::OpfSolution& s = bid.opf[eg.ledger.representative(b)];
        total += outcome.alpha[b] * grid::opf_cost(s, ctx.realized, dt, cfg.grid.voll_eur_mwh);
        shed += outcome.alpha[b] * grid::opf_shed_kwh(s, dt);
      }
      res.tc_cleared = total;
      res.shed_kwh = shed;
    } else {
      res.tc_cleared = hp;
    }
  }
  res.runtime_clearing_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  res.tc_inf = inf.total;
  res.tc_opt = opt->total;
  res.tc_inf_hp = inf.hp;
  res.tc_opt_hp = opt->hp;
  res.eta = efficiency(res.tc_inf, res.tc_cleared, res.tc_opt);
  return res;
}

inline DayResult run_day(const CampaignConfig& cfg, const Instance& inst, const DayContext& ctx) {
  Costs inf = inflexible_cost(cfg, ctx);
  DayBid bid = bid_day(cfg, inst, ctx);
  std::optional<Costs> opt;
  if (bid.eg) opt = perfect_foresight_cost(cfg, ctx);
  return settle(cfg, ctx, bid, inf, opt);
}

/// Per-campaign preparation: HP selection and allocation.
struct Prepared {
  std::vector<thermal::BuildingParams> buildings;
  std::optional<grid::AllocationResult> allocation;
};

inline Prepared prepare(const CampaignConfig& cfg, const Instance& inst) {
  cfg.validate();
  Prepared p;
  p.buildings = select_hp_buildings(inst.buildings, cfg);
  if (cfg.mode == UtilityMode::Integrated) {
    if (!inst.network) fail(ErrorCode::InvalidArgument, "integrated mode needs nodes.csv and edges.csv");
    if (inst.allocation) {
      p.allocation = inst.allocation;
    } else {
      p.allocation = grid::allocate_buildings(p.buildings, *inst.network, cfg.solver);
      log::info("allocated " + std::to_string(p.buildings.size()) + " buildings, total distance " +
                format_double(p.allocation->total_distance_m) + " m");
    }
  }
  return p;
}

inline DayResult run_day(const CampaignConfig& cfg, const Instance& inst, Date d) {
  Prepared p = prepare(cfg, inst);
  DayContext ctx = make_day_context(cfg, inst, d, p.buildings, p.allocation ? &*p.allocation : nullptr);
  return run_day(cfg, inst, ctx);
}

inline double perfect_foresight(const CampaignConfig& cfg, const Instance& inst, Date d) {
  Prepared p = prepare(cfg, inst);
  DayContext ctx = make_day_context(cfg, inst, d, p.buildings, p.allocation ? &*p.allocation : nullptr);
  return perfect_foresight_cost(cfg, ctx).total;
}

struct DayFailure {
  Date day;
  ErrorCode code;
  std::string message;
};

struct CampaignReport {
  std::vector<DayResult> days;
  std::vector<DayFailure> failures;
  double tc_inf = 0.0, tc_cleared = 0.0, tc_opt = 0.0;
  double tc_inf_hp = 0.0, tc_cleared_hp = 0.0, tc_opt_hp = 0.0;
  double eta_weighted = nan;  // summed savings over summed achievable savings
  double eta_mean = nan;      // mean of defined daily ratios
  double savings_eur = 0.0;
  double savings_per_hp_eur = nan;
  double shed_kwh = 0.0;
  int hp_count = 0;
  double runtime_dispatch_s = 0.0;
  double runtime_clearing_s = 0.0;
};

inline void summarize(CampaignReport& rep) {
  double num = 0.0, den = 0.0, eta_sum = 0.0;
  int eta_days = 0;
  rep.tc_inf = rep.tc_cleared = rep.tc_opt = 0.0;
  rep.tc_inf_hp = rep.tc_cleared_hp = rep.tc_opt_hp = 0.0;
  rep.shed_kwh = rep.runtime_dispatch_s = rep.runtime_clearing_s = 0.0;
  for (const auto& d : rep.days) {
    rep.tc_inf += d.tc_inf;
    rep.tc_cleared += d.tc_cleared;
    rep.tc_opt += d.tc_opt;
    rep.tc_inf_hp += d.tc_inf_hp;
    rep.tc_cleared_hp += d.tc_cleared_hp;
    rep.tc_opt_hp += d.tc_opt_hp;
    rep.shed_kwh += d.shed_kwh;
    rep.runtime_dispatch_s += d.runtime_dispatch_s;
    rep.runtime_clearing_s += d.runtime_clearing_s;
    if (!std::isnan(d.eta)) {
      num += d.tc_inf - d.tc_cleared;
      den += d.tc_inf - d.tc_opt;
      eta_sum += d.eta;
      ++eta_days;
    }
  }
  rep.savings_eur = rep.tc_inf - rep.tc_cleared;
  rep.eta_weighted = eta_days > 0 && den > 0.0 ? num / den : nan;
  rep.eta_mean = eta_days > 0 ? eta_sum / eta_days : nan;
  rep.savings_per_hp_eur = rep.hp_count > 0 ? rep.savings_eur / rep.hp_count : nan;
}

/// Runs every day of the range; a failing day is recorded and skipped.
inline CampaignReport run_campaign(const CampaignConfig& cfg, const Instance& inst) {
  Prepared p = prepare(cfg, inst);
  CampaignReport rep;
  for (const auto& b : p.buildings) rep.hp_count += b.has_hp ? 1 : 0;
  for (Date d : cfg.days()) {
    try {
      DayContext ctx = make_day_context(cfg, inst, d, p.buildings, p.allocation ? &*p.allocation : nullptr);
      rep.days.push_back(run_day(cfg, inst, ctx));
    } catch (const Error& e) {
      log::warn(d.iso() + ": " + e.what());
      rep.failures.push_back({d, e.code(), e.what()});
    }
  }
  summarize(rep);
  return rep;
}

}  // namespace flexbid::simulate
