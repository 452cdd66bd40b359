#pragma once

// Single-node RC building model: baseline (set-point holding) heat-pump
// profiles, the per-building cost-minimizing dispatch LP, and constraint
// re-checks for externally produced schedules.

#include <cmath>
#include <string>
#include <vector>

#include "flexbid/common.hpp"
#include "flexbid/lp.hpp"

namespace flexbid::thermal {

enum class Integration {
  Implicit,  // loss term evaluated at the new temperature
  Explicit,  // loss term evaluated at the previous temperature
};

struct ComfortConfig {
  double cop = 4.0;
  double t_set = 20.0;  // °C
  double t_min = 19.0;  // °C
  double t_max = 21.0;  // °C
  double dt = 1.0;      // h
  int horizon = 24;
  Integration integration = Integration::Implicit;

  void validate() const {
    if (!(t_min <= t_set && t_set <= t_max))
      fail(ErrorCode::InvalidArgument, "comfort band must satisfy t_min <= t_set <= t_max");
    if (!(cop > 0.0)) fail(ErrorCode::InvalidArgument, "cop must be positive");
    if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "dt must be positive");
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be >= 1");
  }
};

struct Position {
  double x = 0.0;  // m
  double y = 0.0;  // m
};

struct BuildingParams {
  std::string id;
  double r_th = 1.0;        // K/kW
  double c_th = 1.0;        // kWh/K
  double p_hp_rated = 0.0;  // kW
  double p_pv_rated = 0.0;  // kW
  Position position;
  bool has_hp = false;

  void validate() const {
    if (!(r_th > 0.0)) fail(ErrorCode::InvalidArgument, "building " + id + ": r_th must be positive");
    if (!(c_th > 0.0)) fail(ErrorCode::InvalidArgument, "building " + id + ": c_th must be positive");
    if (p_hp_rated < 0.0 || p_pv_rated < 0.0)
      fail(ErrorCode::InvalidArgument, "building " + id + ": ratings must be non-negative");
  }
};

struct DispatchResult {
  PowerProfile schedule_kw;
  std::vector<double> temperatures;  // indoor °C after each step
  double energy_kwh = 0.0;
  double cost_eur = 0.0;
};

/// Energy cost in EUR of a kW schedule at EUR/MWh prices.
inline double schedule_cost(std::span<const double> schedule_kw, std::span<const double> prices,
                            double dt) {
  return dt * dot(schedule_kw, prices) / units::kw_per_mw;
}

namespace detail {
inline void check_length(std::size_t n, const ComfortConfig& cfg, const char* what) {
  if (n != static_cast<std::size_t>(cfg.horizon))
    fail(ErrorCode::LengthMismatch, std::string(what) + " length " + std::to_string(n) +
                                        " does not match horizon " + std::to_string(cfg.horizon));
}
}  // namespace detail

/// Indoor temperature trajectory under a given HP schedule, starting from
/// the set-point. The implicit variant solves the scalar balance per step.
inline std::vector<double> simulate_temperature(const BuildingParams& b, const ComfortConfig& cfg,
                                                std::span<const double> t_out,
                                                std::span<const double> schedule_kw) {
  detail::check_length(t_out.size(), cfg, "t_out");
  detail::check_length(schedule_kw.size(), cfg, "schedule");
  const double a = cfg.dt / (b.r_th * b.c_th);
  const double gain = cfg.dt / b.c_th * cfg.cop;
  std::vector<double> temps(t_out.size());
  double prev = cfg.t_set;
  for (std::size_t t = 0; t < t_out.size(); ++t) {
    double next = 0.0;
    if (cfg.integration == Integration::Implicit) {
      next = (prev + gain * schedule_kw[t] + a * t_out[t]) / (1.0 + a);
    } else {
      next = prev + gain * schedule_kw[t] - a * (prev - t_out[t]);
    }
    temps[t] = next;
    prev = next;
  }
  return temps;
}

/// Set-point holding profile of an inflexible heat pump. Heating only: hours
/// with outdoor temperature above the set-point draw zero.
inline DispatchResult baseline_profile(const BuildingParams& b, const ComfortConfig& cfg,
                                       std::span<const double> t_out) {
  cfg.validate();
  b.validate();
  detail::check_length(t_out.size(), cfg, "t_out");
  if (!b.has_hp) fail(ErrorCode::InvalidArgument, "building " + b.id + " has no heat pump");
  DispatchResult out;
  out.schedule_kw.resize(t_out.size());
  for (std::size_t t = 0; t < t_out.size(); ++t) {
    double p = std::max(0.0, (cfg.t_set - t_out[t]) / (b.r_th * cfg.cop));
    if (p > b.p_hp_rated * (1.0 + 1e-12)) {
      fail(ErrorCode::InfeasibleBaseline,
           "building " + b.id + ": hour " + std::to_string(t) + " needs " + format_double(p) +
               " kW to hold the set-point, rated " + format_double(b.p_hp_rated) + " kW");
    }
    out.schedule_kw[t] = p;
  }
  out.temperatures = simulate_temperature(b, cfg, t_out, out.schedule_kw);
  out.energy_kwh = cfg.dt * sum(out.schedule_kw);
  return out;
}

/// Profile carried as fixed load when the baseline is infeasible: the
/// set-point demand capped at rated power.
inline PowerProfile capped_baseline(const BuildingParams& b, const ComfortConfig& cfg,
                                    std::span<const double> t_out) {
  PowerProfile p(t_out.size());
  for (std::size_t t = 0; t < t_out.size(); ++t)
    p[t] = std::clamp((cfg.t_set - t_out[t]) / (b.r_th * cfg.cop), 0.0, b.p_hp_rated);
  return p;
}

/// Variable handles of one building's thermal block inside a larger LP.
struct ThermalBlock {
  std::vector<int> power;        // kW per step
  std::vector<int> temperature;  // °C per step
};

/// Adds power/temperature variables, the discretized balance, comfort and
/// power bounds and the daily energy equality for one building. Power
/// variables get `cost_per_kw[t]` as objective coefficient.
inline ThermalBlock add_thermal_block(lp::Model& model, const BuildingParams& b,
                                      const ComfortConfig& cfg, std::span<const double> t_out,
                                      std::span<const double> cost_per_kw, double e_base_kwh) {
  const int horizon = cfg.horizon;
  const double a = cfg.dt / (b.r_th * b.c_th);
  const double gain = cfg.dt / b.c_th * cfg.cop;
  ThermalBlock blk;
  blk.power.reserve(horizon);
  blk.temperature.reserve(horizon);
  for (int t = 0; t < horizon; ++t) {
    blk.power.push_back(model.add_variable(0.0, b.p_hp_rated, cost_per_kw[t]));
    blk.temperature.push_back(model.add_variable(cfg.t_min, cfg.t_max, 0.0));
  }
  for (int t = 0; t < horizon; ++t) {
    std::vector<lp::Term> row;
    double rhs = a * t_out[t];
    if (cfg.integration == Integration::Implicit) {
      // (1 + a) T_t - T_{t-1} - gain P_t = a T_out
      row.push_back({blk.temperature[t], 1.0 + a});
      if (t > 0) row.push_back({blk.temperature[t - 1], -1.0});
      else rhs += cfg.t_set;
    } else {
      // T_t - (1 - a) T_{t-1} - gain P_t = a T_out
      row.push_back({blk.temperature[t], 1.0});
      if (t > 0) row.push_back({blk.temperature[t - 1], -(1.0 - a)});
      else rhs += (1.0 - a) * cfg.t_set;
    }
    row.push_back({blk.power[t], -gain});
    model.add_equality(rhs, row);
  }
  std::vector<lp::Term> energy;
  for (int t = 0; t < horizon; ++t) energy.push_back({blk.power[t], cfg.dt});
  model.add_equality(e_base_kwh, energy);
  return blk;
}

/// Clamps solver noise into the power box and rebuilds the derived fields.
inline DispatchResult finalize_schedule(const BuildingParams& b, const ComfortConfig& cfg,
                                        std::span<const double> t_out,
                                        std::span<const double> prices, PowerProfile schedule_kw) {
  for (double& p : schedule_kw) p = std::clamp(p, 0.0, b.p_hp_rated);
  DispatchResult out;
  out.temperatures = simulate_temperature(b, cfg, t_out, schedule_kw);
  out.energy_kwh = cfg.dt * sum(schedule_kw);
  out.cost_eur = schedule_cost(schedule_kw, prices, cfg.dt);
  out.schedule_kw = std::move(schedule_kw);
  return out;
}

/// Cost-minimizing schedule at the given prices that consumes exactly
/// `e_base_kwh` while respecting power and comfort limits.
inline DispatchResult dispatch(const BuildingParams& b, const ComfortConfig& cfg,
                               std::span<const double> t_out, std::span<const double> prices,
                               double e_base_kwh, const lp::SolverOptions& opts = {}) {
  cfg.validate();
  b.validate();
  detail::check_length(t_out.size(), cfg, "t_out");
  detail::check_length(prices.size(), cfg, "prices");
  std::vector<double> cost_per_kw(prices.size());
  for (std::size_t t = 0; t < prices.size(); ++t)
    cost_per_kw[t] = cfg.dt * prices[t] / units::kw_per_mw;

  lp::Model model;
  ThermalBlock blk = add_thermal_block(model, b, cfg, t_out, cost_per_kw, e_base_kwh);
  lp::Solution sol = model.solve(opts);
  if (sol.status == lp::Status::Infeasible)
    fail(ErrorCode::Infeasible, "building " + b.id + ": no schedule satisfies the comfort and energy constraints");
  if (!sol.optimal())
    fail(ErrorCode::SolverFailure, "building " + b.id + ": dispatch LP " + sol.detail);

  PowerProfile schedule(cfg.horizon);
  for (int t = 0; t < cfg.horizon; ++t) schedule[t] = sol.x[blk.power[t]];
  return finalize_schedule(b, cfg, t_out, prices, std::move(schedule));
}

/// Worst violations of a schedule against the building's feasible set.
struct ScheduleCheck {
  double power_violation_kw = 0.0;
  double comfort_violation_k = 0.0;
  double energy_violation_kwh = 0.0;

  bool ok(double power_tol = 1e-9, double comfort_tol = 1e-6, double energy_tol = 1e-6) const {
    return power_violation_kw <= power_tol && comfort_violation_k <= comfort_tol &&
           energy_violation_kwh <= energy_tol;
  }
};

inline ScheduleCheck check_schedule(const BuildingParams& b, const ComfortConfig& cfg,
                                    std::span<const double> t_out,
                                    std::span<const double> schedule_kw,
                                    double expected_energy_kwh) {
  ScheduleCheck c;
  for (double p : schedule_kw) {
    c.power_violation_kw = std::max({c.power_violation_kw, -p, p - b.p_hp_rated});
  }
  for (double temp : simulate_temperature(b, cfg, t_out, schedule_kw)) {
    c.comfort_violation_k = std::max({c.comfort_violation_k, cfg.t_min - temp, temp - cfg.t_max});
  }
  double energy = cfg.dt * sum(schedule_kw);
  c.energy_violation_kwh = std::abs(energy - expected_energy_kwh) / std::max(1.0, expected_energy_kwh);
  return c;
}

}  // namespace flexbid::thermal
