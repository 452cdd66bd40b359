#pragma once

// Seeded desk-scale instances: buildings scattered around a balanced radial
// feeder, winter weather, and day-ahead prices with two daily valleys.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "flexbid/common.hpp"
#include "flexbid/grid.hpp"
#include "flexbid/instance.hpp"

namespace flexbid::synthetic {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SyntheticSpec {
  int buildings = 30;
  double hp_share_pct = 100.0;
  std::uint64_t seed = 1;

  Range r_th{5.0, 10.0};      // K/kW
  Range c_th{6.0, 14.0};      // kWh/K
  Range p_hp_rated{3.0, 6.0}; // kW electrical
  Range p_pv_rated{3.0, 8.0}; // kW, for buildings with PV
  double pv_probability = 0.5;

  // Feeder: substation root, `branching` children per node, `depth` levels.
  bool network = true;
  int depth = 2;
  int branching = 3;
  double spacing_m = 120.0;
  double node_load_kw = 40.0;      // p_cap per non-substation node
  double r_ohm_per_km = 0.1;
  double x_ohm_per_km = 0.07;
  double s_base_kva = 1000.0;
  double v_base_kv = 0.4;
  // Line ratings = stress_margin x design peak, where the design peak counts
  // fixed demand plus `design_hp_share` of the nearby HP ratings. Lower
  // margins congest the feeder earlier as the HP share grows.
  double stress_margin = 1.0;
  double design_hp_share = 0.3;

  // Calendar: campaign days plus the history needed by the scenario set.
  Date start{2024, 10, 1};
  int days = 30;
  int history_days = 31;

  // Weather.
  double t_out_mean_c = 3.0;
  double t_out_day_sd_c = 2.0;
  double t_out_amplitude_c = 4.0;
  double t_out_noise_c = 0.5;

  // Prices.
  double price_level_eur_mwh = 120.0;
  double volatility = 1.0;  // 0 gives flat prices
  double level_persistence = 0.8;
  double shape_persistence = 0.7;
  double hourly_noise_eur_mwh = 6.0;
  bool write_forecast = false;  // otherwise the persistence forecast is filled at load

  void validate() const {
    if (buildings < 1) fail(ErrorCode::InvalidArgument, "building count must be >= 1");
    if (!(hp_share_pct > 0.0 && hp_share_pct <= 100.0)) fail(ErrorCode::InvalidArgument, "HP share must lie in (0, 100]");
    for (const Range* r : {&r_th, &c_th, &p_hp_rated, &p_pv_rated})
      if (!(r->lo > 0.0 && r->lo <= r->hi)) fail(ErrorCode::InvalidArgument, "parameter ranges must satisfy 0 < lo <= hi");
    if (pv_probability < 0.0 || pv_probability > 1.0) fail(ErrorCode::InvalidArgument, "PV probability must lie in [0, 1]");
    if (depth < 1 || branching < 1) fail(ErrorCode::InvalidArgument, "feeder depth and branching must be >= 1");
    if (!(stress_margin > 0.0)) fail(ErrorCode::InvalidArgument, "stress margin must be positive");
    if (days < 1 || history_days < 0) fail(ErrorCode::InvalidArgument, "day counts must be positive");
    if (volatility < 0.0) fail(ErrorCode::InvalidArgument, "volatility must be >= 0");
  }

  Date first_day() const { return start - history_days; }
  Date last_day() const { return start + (days - 1); }
};

namespace detail {

inline double uniform(std::mt19937_64& rng, Range r) {
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

inline double normal(std::mt19937_64& rng, double sd) {
  return sd > 0.0 ? std::normal_distribution<double>(0.0, sd)(rng) : 0.0;
}

// Typical winter day-ahead shape: night and midday valleys, morning and
// evening peaks. Zero mean over the day.
inline double price_shape(int h) {
  static const double shape[24] = {-11, -24, -28, -30, -28, -18, 4,  24, 30, 18, 2,  -10,
                                   -16, -18, -12, -2,  12,  28,  34, 30, 18, 6,  -4, -5};
  return shape[h];
}

inline double load_shape(int h) {
  static const double slf[24] = {0.45, 0.42, 0.40, 0.40, 0.42, 0.50, 0.64, 0.78, 0.82, 0.76, 0.70, 0.68,
                                 0.66, 0.64, 0.64, 0.66, 0.74, 0.86, 0.92, 0.88, 0.78, 0.66, 0.56, 0.50};
  return slf[h];
}

}  // namespace detail

/// Generates a complete instance. The campaign config covers the campaign
/// days and carries the spec's HP share and seed.
inline std::pair<Instance, CampaignConfig> generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  // Independent streams so that, e.g., the price volatility does not change
  // the drawn buildings or weather.
  auto stream = [&](std::uint64_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    return std::mt19937_64(seq);
  };
  std::mt19937_64 rng = stream(1);
  std::mt19937_64 wrng = stream(2);
  std::mt19937_64 prng = stream(3);
  Instance inst;
  constexpr int H = 24;
  const double pi = std::numbers::pi;

  // Feeder nodes on concentric rings around the substation.
  grid::RadialNetwork net;
  net.s_base_kva = spec.s_base_kva;
  net.v_base_kv = spec.v_base_kv;
  {
    grid::Node sub;
    sub.id = "n0";
    sub.is_substation = true;
    sub.v_nom_pu = 1.0;
    net.nodes.push_back(sub);
    std::vector<int> frontier{0};
    std::vector<double> angle_of{0.0};
    double sector = 2.0 * pi;
    for (int level = 1; level <= spec.depth; ++level) {
      std::vector<int> next;
      double child_sector = sector / spec.branching;
      for (int parent : frontier) {
        for (int k = 0; k < spec.branching; ++k) {
          grid::Node n;
          n.id = "n" + std::to_string(net.nodes.size());
          n.ancestor = net.nodes[parent].id;
          double angle = angle_of[parent] - sector / 2.0 + child_sector * (k + 0.5);
          if (level == 1) angle = child_sector * k;
          n.position = {spec.spacing_m * level * std::cos(angle), spec.spacing_m * level * std::sin(angle)};
          n.p_cap_kw = spec.node_load_kw;
          angle_of.push_back(angle);
          next.push_back(static_cast<int>(net.nodes.size()));
          net.nodes.push_back(std::move(n));
        }
      }
      frontier = std::move(next);
      sector = child_sector;
    }
  }

  // Buildings around randomly chosen non-substation nodes.
  std::vector<int> home_node;
  for (int i = 0; i < spec.buildings; ++i) {
    thermal::BuildingParams b;
    b.id = "b" + std::to_string(i + 1);
    int node = 1 + static_cast<int>(rng() % (net.nodes.size() - 1));
    double r = std::uniform_real_distribution<double>(5.0, 0.35 * spec.spacing_m)(rng);
    double phi = std::uniform_real_distribution<double>(0.0, 2.0 * pi)(rng);
    b.position = {net.nodes[node].position.x + r * std::cos(phi), net.nodes[node].position.y + r * std::sin(phi)};
    b.r_th = detail::uniform(rng, spec.r_th);
    b.c_th = detail::uniform(rng, spec.c_th);
    b.p_hp_rated = detail::uniform(rng, spec.p_hp_rated);
    bool pv = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < spec.pv_probability;
    b.p_pv_rated = pv ? detail::uniform(rng, spec.p_pv_rated) : 0.0;
    home_node.push_back(node);
    inst.buildings.push_back(std::move(b));
  }
  auto order = hp_rollout_order(inst.buildings.size(), spec.seed);
  std::size_t hp_count = hp_count_for_share(inst.buildings.size(), spec.hp_share_pct);
  for (std::size_t i = 0; i < hp_count; ++i) inst.buildings[order[i]].has_hp = true;

  // Node capacities must host whatever is connected nearby.
  std::vector<double> hp_near(net.nodes.size(), 0.0), pv_near(net.nodes.size(), 0.0);
  for (std::size_t i = 0; i < inst.buildings.size(); ++i) {
    hp_near[home_node[i]] += inst.buildings[i].p_hp_rated;
    pv_near[home_node[i]] += inst.buildings[i].p_pv_rated;
  }
  for (std::size_t n = 1; n < net.nodes.size(); ++n)
    net.nodes[n].p_cap_kw = std::max({spec.node_load_kw, hp_near[n], pv_near[n]});

  // Line and substation ratings from the design peak of each subtree.
  std::vector<double> design(net.nodes.size(), 0.0);
  for (std::size_t n = 1; n < net.nodes.size(); ++n)
    design[n] = net.nodes[n].p_cap_kw * 0.92 + spec.design_hp_share * hp_near[n];
  std::vector<double> subtree = design;
  for (std::size_t n = net.nodes.size(); n-- > 1;) {
    const std::string& anc = *net.nodes[n].ancestor;
    int a = std::stoi(anc.substr(1));
    subtree[a] += subtree[n];
  }
  const double z_base = spec.v_base_kv * spec.v_base_kv * 1000.0 / spec.s_base_kva;  // ohm
  for (std::size_t n = 1; n < net.nodes.size(); ++n) {
    const grid::Node& node = net.nodes[n];
    int a = std::stoi(node.ancestor->substr(1));
    double len_km = grid::distance(node.position, net.nodes[a].position) / 1000.0;
    grid::Line l;
    l.from = node.id;
    l.to = *node.ancestor;
    l.r_pu = spec.r_ohm_per_km * len_km / z_base;
    l.x_pu = spec.x_ohm_per_km * len_km / z_base;
    l.s_rating_pu = spec.stress_margin * subtree[n] / spec.s_base_kva;
    net.lines.push_back(l);
  }
  net.nodes[0].s_rating_kva = spec.stress_margin * subtree[0];
  if (spec.network) inst.network = net;

  // Weather, load and PV profiles, prices.
  double t_dev = 0.0;
  double level_dev = 0.0;
  double shape_amp = 1.0;
  for (Date d = spec.first_day(); d <= spec.last_day(); d = d + 1) {
    t_dev = 0.7 * t_dev + detail::normal(wrng, spec.t_out_day_sd_c);
    std::vector<double> temps(H);
    for (int h = 0; h < H; ++h)
      temps[h] = spec.t_out_mean_c + t_dev + spec.t_out_amplitude_c * std::sin(2.0 * pi * (h - 9) / 24.0) +
                 detail::normal(wrng, spec.t_out_noise_c);
    inst.weather.emplace(d, std::move(temps));

    double cloud = std::uniform_real_distribution<double>(0.3, 1.0)(wrng);
    grid::GridTimeSeries prof;
    for (int h = 0; h < H; ++h) {
      double slf = detail::load_shape(h) * (d.is_weekend() ? 0.9 : 1.0) * (1.0 - 0.01 * t_dev);
      prof.slf.push_back(std::clamp(slf, 0.0, 1.0));
      double sun = h >= 8 && h <= 16 ? std::sin(pi * (h - 7) / 10.0) : 0.0;
      prof.cf.push_back(std::clamp(0.4 * cloud * sun, 0.0, 1.0));
    }
    inst.profiles.emplace(d, std::move(prof));

    const double vol = spec.volatility;
    level_dev = spec.level_persistence * level_dev + detail::normal(prng, 12.0);
    shape_amp = spec.shape_persistence * shape_amp + (1.0 - spec.shape_persistence) * 1.0 + detail::normal(prng, 0.15);
    double weekend = d.is_weekend() ? -15.0 : 0.0;
    scenarios::DayPrices day;
    double noise = 0.0;
    for (int h = 0; h < H; ++h) {
      noise = 0.5 * noise + detail::normal(prng, spec.hourly_noise_eur_mwh);
      double p = spec.price_level_eur_mwh +
                 vol * (level_dev + weekend + shape_amp * detail::price_shape(h) + noise);
      day.realized.push_back(std::max(p, 1.0));
    }
    inst.prices.days.emplace(d, std::move(day));
  }
  if (spec.write_forecast) scenarios::fill_missing_forecasts(inst.prices);

  CampaignConfig cfg;
  cfg.start = spec.start;
  cfg.end = spec.last_day();
  cfg.seed = spec.seed;
  cfg.s_base_kva = spec.s_base_kva;
  cfg.v_base_kv = spec.v_base_kv;
  return {std::move(inst), cfg};
}

}  // namespace flexbid::synthetic
