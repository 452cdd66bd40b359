#pragma once

// Radial distribution network: topology validation, building-to-node
// allocation, and the integrated-utility scenario dispatch as a linearized
// DistFlow OPF with load shedding.
//
// Flow sign convention: P_n, Q_n is the flow from node n towards its
// ancestor (positive upstream). For a substation it is the export towards
// the external grid, so the PCC import is -P_sub.

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "flexbid/common.hpp"
#include "flexbid/lp.hpp"
#include "flexbid/thermal.hpp"

namespace flexbid::grid {

struct Node {
  std::string id;
  std::optional<std::string> ancestor;
  double p_cap_kw = 0.0;
  bool is_substation = false;
  double s_rating_kva = 0.0;  // substations only
  double v_nom_pu = 1.0;      // substations only
  thermal::Position position;
};

struct Line {
  std::string from;  // child
  std::string to;    // ancestor
  double r_pu = 0.0;
  double x_pu = 0.0;
  double s_rating_pu = 0.0;
};

struct RadialNetwork {
  std::vector<Node> nodes;
  std::vector<Line> lines;
  double s_base_kva = 1000.0;
  double v_base_kv = 0.4;
};

/// Index structure of a validated network.
struct Topology {
  std::unordered_map<std::string, int> index;
  std::vector<int> ancestor;                // -1 for substations
  std::vector<int> line_of;                 // line index towards the ancestor, -1 for substations
  std::vector<std::vector<int>> children;
  std::vector<int> order;                   // substations first, then breadth-first
  std::vector<int> substations;

  int at(const std::string& id) const {
    auto it = index.find(id);
    if (it == index.end()) fail(ErrorCode::DanglingReference, "unknown node '" + id + "'");
    return it->second;
  }
};

inline Topology validate_radial(const RadialNetwork& net) {
  Topology topo;
  const int n = static_cast<int>(net.nodes.size());
  if (n == 0) fail(ErrorCode::EmptyInput, "network has no nodes");
  if (!(net.s_base_kva > 0.0)) fail(ErrorCode::InvalidArgument, "S_base must be positive");
  for (int i = 0; i < n; ++i) {
    const Node& node = net.nodes[i];
    if (!topo.index.emplace(node.id, i).second)
      fail(ErrorCode::SchemaError, "duplicate node id '" + node.id + "'");
    if (node.p_cap_kw < 0.0) fail(ErrorCode::SchemaError, "node " + node.id + ": negative p_cap");
  }

  topo.ancestor.assign(n, -1);
  topo.line_of.assign(n, -1);
  for (int l = 0; l < static_cast<int>(net.lines.size()); ++l) {
    const Line& line = net.lines[l];
    auto from = topo.index.find(line.from);
    auto to = topo.index.find(line.to);
    if (from == topo.index.end() || to == topo.index.end())
      fail(ErrorCode::DanglingReference, "line " + line.from + "->" + line.to + " references an unknown node");
    if (line.r_pu < 0.0 || line.x_pu < 0.0 || !(line.s_rating_pu > 0.0))
      fail(ErrorCode::SchemaError, "line " + line.from + "->" + line.to + ": invalid impedance or rating");
    if (topo.line_of[from->second] >= 0)
      fail(ErrorCode::MultipleAncestors, "node '" + line.from + "' has more than one line towards an ancestor");
    topo.line_of[from->second] = l;
    topo.ancestor[from->second] = to->second;
  }
  for (int i = 0; i < n; ++i) {
    const Node& node = net.nodes[i];
    if (!node.ancestor) continue;
    auto it = topo.index.find(*node.ancestor);
    if (it == topo.index.end())
      fail(ErrorCode::DanglingReference, "node " + node.id + ": unknown ancestor '" + *node.ancestor + "'");
    if (topo.ancestor[i] >= 0 && topo.ancestor[i] != it->second)
      fail(ErrorCode::MultipleAncestors, "node '" + node.id + "' declares ancestor '" + *node.ancestor +
                                             "' but its line leads to '" + net.nodes[topo.ancestor[i]].id + "'");
    if (topo.ancestor[i] < 0) topo.ancestor[i] = it->second;
  }

  // Cycle search along ancestor chains.
  std::vector<int> state(n, 0);  // 0 new, 1 on current chain, 2 done
  for (int start = 0; start < n; ++start) {
    std::vector<int> chain;
    int v = start;
    while (v >= 0 && state[v] == 0) {
      state[v] = 1;
      chain.push_back(v);
      v = topo.ancestor[v];
    }
    if (v >= 0 && state[v] == 1)
      fail(ErrorCode::CycleDetected, "ancestor chain through node '" + net.nodes[v].id + "' forms a cycle");
    for (int c : chain) state[c] = 2;
  }

  for (int i = 0; i < n; ++i) {
    const Node& node = net.nodes[i];
    if (node.is_substation) {
      if (topo.ancestor[i] >= 0)
        fail(ErrorCode::SchemaError, "substation '" + node.id + "' must not have an ancestor");
      if (!(node.s_rating_kva > 0.0))
        fail(ErrorCode::SchemaError, "substation '" + node.id + "' needs a positive rating");
      topo.substations.push_back(i);
    } else {
      if (topo.ancestor[i] < 0)
        fail(ErrorCode::DisconnectedNode, "node '" + node.id + "' has no ancestor and is not a substation");
      if (topo.line_of[i] < 0)
        fail(ErrorCode::DisconnectedNode, "node '" + node.id + "' has no line towards its ancestor");
    }
  }
  if (topo.substations.empty()) fail(ErrorCode::DisconnectedNode, "network has no substation");

  topo.children.assign(n, {});
  for (int i = 0; i < n; ++i)
    if (topo.ancestor[i] >= 0) topo.children[topo.ancestor[i]].push_back(i);
  for (int s : topo.substations) topo.order.push_back(s);
  for (std::size_t k = 0; k < topo.order.size(); ++k)
    for (int c : topo.children[topo.order[k]]) topo.order.push_back(c);
  // Without cycles every chain ends at a root; roots are substations, so
  // the sweep reaches every node.
  return topo;
}

// --- Allocation ------------------------------------------------------------

struct AllocationResult {
  std::map<std::string, std::string> node_of;  // building id -> node id
  double total_distance_m = 0.0;
};

inline double distance(const thermal::Position& a, const thermal::Position& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// HP capacity a building puts on its node (only installed heat pumps count).
inline double hp_load_kw(const thermal::BuildingParams& b) { return b.has_hp ? b.p_hp_rated : 0.0; }

inline double allocation_distance(const std::vector<thermal::BuildingParams>& buildings,
                                  const RadialNetwork& net, const AllocationResult& alloc) {
  Topology topo = validate_radial(net);
  double total = 0.0;
  for (const auto& b : buildings) {
    auto it = alloc.node_of.find(b.id);
    if (it == alloc.node_of.end()) fail(ErrorCode::DanglingReference, "building " + b.id + " is not allocated");
    total += distance(b.position, net.nodes[topo.at(it->second)].position);
  }
  return total;
}

/// Distance-minimizing assignment of buildings to nodes subject to the HP and
/// PV connection-capacity rows, solved as a MILP.
inline AllocationResult allocate_buildings(const std::vector<thermal::BuildingParams>& buildings,
                                           const RadialNetwork& net,
                                           const lp::SolverOptions& opts = {}) {
  Topology topo = validate_radial(net);
  if (buildings.empty()) return {};
  double cap_total = 0.0, hp_total = 0.0, pv_total = 0.0;
  for (const auto& node : net.nodes) cap_total += node.p_cap_kw;
  for (const auto& b : buildings) {
    hp_total += hp_load_kw(b);
    pv_total += b.p_pv_rated;
  }
  if (hp_total > cap_total)
    fail(ErrorCode::Infeasible, "allocation infeasible: HP capacity " + format_double(hp_total) +
                                    " kW exceeds total node capacity " + format_double(cap_total) + " kW");
  if (pv_total > cap_total)
    fail(ErrorCode::Infeasible, "allocation infeasible: PV capacity " + format_double(pv_total) +
                                    " kW exceeds total node capacity " + format_double(cap_total) + " kW");

  const std::size_t nb = buildings.size(), nn = net.nodes.size();
  auto solve = [&](bool hp_rows, bool pv_rows) {
    lp::Model model;
    std::vector<std::vector<int>> var(nb, std::vector<int>(nn));
    for (std::size_t b = 0; b < nb; ++b)
      for (std::size_t n = 0; n < nn; ++n)
        var[b][n] = model.add_variable(0.0, 1.0, distance(buildings[b].position, net.nodes[n].position), true);
    for (std::size_t b = 0; b < nb; ++b) {
      std::vector<lp::Term> row;
      for (std::size_t n = 0; n < nn; ++n) row.push_back({var[b][n], 1.0});
      model.add_equality(1.0, row);
    }
    for (std::size_t n = 0; n < nn; ++n) {
      std::vector<lp::Term> hp, pv;
      for (std::size_t b = 0; b < nb; ++b) {
        hp.push_back({var[b][n], hp_load_kw(buildings[b])});
        pv.push_back({var[b][n], buildings[b].p_pv_rated});
      }
      if (hp_rows) model.add_row(-lp::inf, net.nodes[n].p_cap_kw, hp);
      if (pv_rows) model.add_row(-lp::inf, net.nodes[n].p_cap_kw, pv);
    }
    return std::make_pair(model.solve(opts), var);
  };

  auto [sol, var] = solve(true, true);
  if (sol.status == lp::Status::Infeasible) {
    bool hp_alone = solve(true, false).first.status == lp::Status::Infeasible;
    bool pv_alone = solve(false, true).first.status == lp::Status::Infeasible;
    std::string which = hp_alone && pv_alone ? "HP and PV capacity rows bind"
                        : hp_alone           ? "HP capacity rows bind"
                        : pv_alone           ? "PV capacity rows bind"
                                             : "HP and PV capacity rows jointly bind";
    fail(ErrorCode::Infeasible, "allocation infeasible: " + which);
  }
  if (!sol.optimal()) fail(ErrorCode::SolverFailure, "allocation MILP: " + sol.detail);

  AllocationResult out;
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t chosen = 0;
    for (std::size_t n = 1; n < nn; ++n)
      if (sol.x[var[b][n]] > sol.x[var[b][chosen]]) chosen = n;
    out.node_of[buildings[b].id] = net.nodes[chosen].id;
    out.total_distance_m += distance(buildings[b].position, net.nodes[chosen].position);
  }
  return out;
}

// --- Integrated dispatch ---------------------------------------------------

struct GridSettings {
  double v_min_pu = 0.97;
  double v_max_pu = 1.03;
  double rar = 0.05;  // reactive-to-active ratio
  int facets = 8;     // polygon facets replacing each apparent-power circle
  double voll_eur_mwh = 10000.0;
};

/// Daily system load factor and PV capacity factor.
struct GridTimeSeries {
  std::vector<double> slf;
  std::vector<double> cf;
};

/// Squared voltage at a child node given the ancestor's squared voltage and
/// the upstream-positive flow on the connecting line. Consumption downstream
/// (negative upstream flow) lowers the child voltage.
inline double child_squared_voltage(double u_ancestor, double p_up_pu, double q_up_pu, double r_pu,
                                    double x_pu) {
  return u_ancestor + 2.0 * (r_pu * p_up_pu + x_pu * q_up_pu);
}

/// Facets of the regular polygon inscribed in the circle of radius `rating`
/// with vertices on the axes: cos(θ_k) P + sin(θ_k) Q <= rating cos(π/N).
struct PolygonFacet {
  double cp, cq, rhs;
};

inline std::vector<PolygonFacet> inscribed_polygon(double rating, int facets) {
  if (facets < 3) fail(ErrorCode::InvalidArgument, "polygon needs at least 3 facets");
  std::vector<PolygonFacet> out;
  const double half = std::numbers::pi / facets;
  for (int k = 0; k < facets; ++k) {
    double theta = (2.0 * k + 1.0) * half;
    out.push_back({std::cos(theta), std::sin(theta), rating * std::cos(half)});
  }
  return out;
}

enum class Flexibility { Flexible, Inflexible };

/// Day-level data shared by all scenario OPFs of one day.
struct GridDay {
  RadialNetwork net;
  Topology topo;
  GridSettings settings;
  thermal::ComfortConfig cfg;
  std::vector<double> t_out;

  struct FlexibleBuilding {
    thermal::BuildingParams params;
    int node = -1;
    thermal::DispatchResult baseline;
  };
  std::vector<FlexibleBuilding> flexible;
  std::vector<std::string> excluded;        // HP buildings with infeasible baseline
  std::vector<std::vector<double>> dem_kw;  // [node][t]  P_cap * SLF
  std::vector<std::vector<double>> base_hp_kw;    // all HP baselines at the node
  std::vector<std::vector<double>> excluded_hp_kw;  // capped profiles of excluded buildings
  std::vector<std::vector<double>> fix_kw;  // dem - base_hp
  std::vector<std::vector<double>> pv_kw;

  int horizon() const { return cfg.horizon; }
};

inline GridDay prepare_grid_day(const RadialNetwork& net, const std::vector<thermal::BuildingParams>& buildings,
                                const AllocationResult& alloc, const thermal::ComfortConfig& cfg,
                                std::span<const double> t_out, const GridTimeSeries& series,
                                const GridSettings& settings) {
  cfg.validate();
  const std::size_t horizon = cfg.horizon;
  if (t_out.size() != horizon || series.slf.size() != horizon || series.cf.size() != horizon)
    fail(ErrorCode::LengthMismatch, "grid time series do not match the horizon");
  for (std::size_t t = 0; t < horizon; ++t) {
    if (series.slf[t] < 0.0 || series.slf[t] > 1.0 || series.cf[t] < 0.0 || series.cf[t] > 1.0)
      fail(ErrorCode::InvalidArgument, "load or capacity factor outside [0, 1] at hour " + std::to_string(t));
  }
  if (settings.rar < 0.0) fail(ErrorCode::InvalidArgument, "reactive-to-active ratio must be >= 0");

  GridDay day;
  day.net = net;
  day.topo = validate_radial(net);
  day.settings = settings;
  day.cfg = cfg;
  day.t_out.assign(t_out.begin(), t_out.end());
  const std::size_t nn = net.nodes.size();
  auto grid = [&] { return std::vector<std::vector<double>>(nn, std::vector<double>(horizon, 0.0)); };
  day.dem_kw = grid();
  day.base_hp_kw = grid();
  day.excluded_hp_kw = grid();
  day.pv_kw = grid();

  for (std::size_t n = 0; n < nn; ++n)
    for (std::size_t t = 0; t < horizon; ++t) day.dem_kw[n][t] = net.nodes[n].p_cap_kw * series.slf[t];

  for (const auto& b : buildings) {
    auto it = alloc.node_of.find(b.id);
    if (it == alloc.node_of.end()) fail(ErrorCode::DanglingReference, "building " + b.id + " is not allocated");
    int node = day.topo.at(it->second);
    for (std::size_t t = 0; t < horizon; ++t) day.pv_kw[node][t] += b.p_pv_rated * series.cf[t];
    if (!b.has_hp) continue;
    try {
      thermal::DispatchResult base = thermal::baseline_profile(b, cfg, t_out);
      for (std::size_t t = 0; t < horizon; ++t) day.base_hp_kw[node][t] += base.schedule_kw[t];
      day.flexible.push_back({b, node, std::move(base)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleBaseline) throw;
      log::warn(std::string(e.what()) + "; carried as fixed load");
      PowerProfile capped = thermal::capped_baseline(b, cfg, t_out);
      for (std::size_t t = 0; t < horizon; ++t) {
        day.base_hp_kw[node][t] += capped[t];
        day.excluded_hp_kw[node][t] += capped[t];
      }
      day.excluded.push_back(b.id);
    }
  }
  day.fix_kw = grid();
  for (std::size_t n = 0; n < nn; ++n)
    for (std::size_t t = 0; t < horizon; ++t) day.fix_kw[n][t] = day.dem_kw[n][t] - day.base_hp_kw[n][t];
  return day;
}

struct OpfSolution {
  // [node][t]
  std::vector<std::vector<double>> hp_kw;
  std::vector<std::vector<double>> shed_kw;
  std::vector<std::vector<double>> u_pu2;
  std::vector<std::vector<double>> p_inj_pu;
  std::vector<std::vector<double>> q_inj_pu;
  std::vector<std::vector<double>> p_flow_pu;  // towards ancestor / external grid
  std::vector<std::vector<double>> q_flow_pu;
  PowerProfile pcc_mw;  // substation import
  double objective_eur = 0.0;
  /// Schedules of the flexible HP buildings, in GridDay::flexible order.
  std::vector<thermal::DispatchResult> buildings;
};

/// Objective of a solved OPF re-evaluated at other prices.
inline double opf_cost(const OpfSolution& sol, std::span<const double> prices, double dt, double voll) {
  double cost = dt * dot(prices, sol.pcc_mw);
  for (const auto& node : sol.shed_kw) cost += dt * voll * units::kw_to_mw(sum(node));
  return cost;
}

inline double opf_shed_kwh(const OpfSolution& sol, double dt) {
  double e = 0.0;
  for (const auto& node : sol.shed_kw) e += dt * sum(node);
  return e;
}

/// Joint scenario dispatch: minimizes dt * Σ_t (λ_t P^PCC_t + VoLL Σ_n P^LS_{n,t})
/// over HP schedules and shedding, under LinDistFlow balances, polygonal
/// loading limits, voltage bounds and each building's thermal constraints.
inline OpfSolution integrated_dispatch(const GridDay& day, std::span<const double> prices,
                                       Flexibility flex = Flexibility::Flexible,
                                       const lp::SolverOptions& opts = {}) {
  const int horizon = day.horizon();
  if (prices.size() != static_cast<std::size_t>(horizon))
    fail(ErrorCode::LengthMismatch, "prices do not match the horizon");
  const auto& net = day.net;
  const auto& topo = day.topo;
  const auto& st = day.settings;
  const double sb = net.s_base_kva;
  const double dt = day.cfg.dt;
  const int nn = static_cast<int>(net.nodes.size());

  lp::Model model;
  std::vector<std::vector<int>> shed(nn, std::vector<int>(horizon)), pf = shed, qf = shed, u = shed;
  for (int t = 0; t < horizon; ++t) {
    for (int n = 0; n < nn; ++n) {
      const Node& node = net.nodes[n];
      double shed_max = std::max(0.0, day.fix_kw[n][t]) / sb;
      shed[n][t] = model.add_variable(0.0, shed_max, dt * st.voll_eur_mwh * sb / units::kw_per_mw);
      double flow_cost = node.is_substation ? -dt * prices[t] * sb / units::kw_per_mw : 0.0;
      pf[n][t] = model.add_variable(-lp::inf, lp::inf, flow_cost);
      qf[n][t] = model.add_variable(-lp::inf, lp::inf, 0.0);
      if (node.is_substation) {
        double u_nom = node.v_nom_pu * node.v_nom_pu;
        u[n][t] = model.add_variable(u_nom, u_nom, 0.0);
      } else {
        u[n][t] = model.add_variable(st.v_min_pu * st.v_min_pu, st.v_max_pu * st.v_max_pu, 0.0);
      }
    }
  }

  std::vector<thermal::ThermalBlock> blocks;
  const std::vector<double> zero_cost(horizon, 0.0);
  if (flex == Flexibility::Flexible) {
    for (const auto& fb : day.flexible)
      blocks.push_back(thermal::add_thermal_block(model, fb.params, day.cfg, day.t_out, zero_cost,
                                                  fb.baseline.energy_kwh));
  }
  std::vector<std::vector<int>> flex_at(nn);
  for (int i = 0; i < static_cast<int>(day.flexible.size()); ++i) flex_at[day.flexible[i].node].push_back(i);

  for (int t = 0; t < horizon; ++t) {
    for (int n = 0; n < nn; ++n) {
      double fixed_hp = flex == Flexibility::Flexible ? day.excluded_hp_kw[n][t] : day.base_hp_kw[n][t];
      // P_n - Σ_c P_c - LS_n + HP_n = PV_n - P^fix_n   (pu)
      std::vector<lp::Term> prow{{pf[n][t], 1.0}, {shed[n][t], -1.0}};
      std::vector<lp::Term> qrow{{qf[n][t], 1.0}};
      for (int c : topo.children[n]) {
        prow.push_back({pf[c][t], -1.0});
        qrow.push_back({qf[c][t], -1.0});
      }
      if (flex == Flexibility::Flexible) {
        for (int i : flex_at[n]) {
          prow.push_back({blocks[i].power[t], 1.0 / sb});
          qrow.push_back({blocks[i].power[t], st.rar / sb});
        }
      }
      model.add_equality((day.pv_kw[n][t] - day.fix_kw[n][t] - fixed_hp) / sb, prow);
      model.add_equality(st.rar * (-day.fix_kw[n][t] - fixed_hp) / sb, qrow);

      double rating = 0.0;
      if (net.nodes[n].is_substation) {
        rating = net.nodes[n].s_rating_kva / sb;
      } else {
        const Line& line = net.lines[topo.line_of[n]];
        rating = line.s_rating_pu;
        int a = topo.ancestor[n];
        // U_n = U_a + 2 (r P_n + x Q_n)
        model.add_equality(0.0, {{u[n][t], 1.0}, {u[a][t], -1.0}, {pf[n][t], -2.0 * line.r_pu},
                                 {qf[n][t], -2.0 * line.x_pu}});
      }
      for (const auto& f : inscribed_polygon(rating, st.facets))
        model.add_row(-lp::inf, f.rhs, {{pf[n][t], f.cp}, {qf[n][t], f.cq}});
    }
  }

  lp::Solution sol = model.solve(opts);
  if (sol.status == lp::Status::Infeasible)
    fail(ErrorCode::Infeasible, "integrated dispatch infeasible (shedding should always provide recourse; check network data)");
  if (!sol.optimal()) fail(ErrorCode::SolverFailure, "integrated dispatch: " + sol.detail);

  OpfSolution out;
  auto grid = [&] { return std::vector<std::vector<double>>(nn, std::vector<double>(horizon, 0.0)); };
  out.hp_kw = grid();
  out.shed_kw = grid();
  out.u_pu2 = grid();
  out.p_inj_pu = grid();
  out.q_inj_pu = grid();
  out.p_flow_pu = grid();
  out.q_flow_pu = grid();
  out.pcc_mw.assign(horizon, 0.0);

  if (flex == Flexibility::Flexible) {
    for (std::size_t i = 0; i < day.flexible.size(); ++i) {
      PowerProfile sched(horizon);
      for (int t = 0; t < horizon; ++t) sched[t] = sol.x[blocks[i].power[t]];
      out.buildings.push_back(
          thermal::finalize_schedule(day.flexible[i].params, day.cfg, day.t_out, prices, std::move(sched)));
    }
  } else {
    for (const auto& fb : day.flexible) {
      thermal::DispatchResult r = fb.baseline;
      r.cost_eur = thermal::schedule_cost(r.schedule_kw, prices, dt);
      out.buildings.push_back(std::move(r));
    }
  }

  for (int n = 0; n < nn; ++n) {
    for (int t = 0; t < horizon; ++t) {
      double hp = day.excluded_hp_kw[n][t];
      for (int i : flex_at[n]) hp += out.buildings[i].schedule_kw[t];
      out.hp_kw[n][t] = hp;
      out.shed_kw[n][t] = sol.x[shed[n][t]] * sb;
      out.u_pu2[n][t] = sol.x[u[n][t]];
      out.p_flow_pu[n][t] = sol.x[pf[n][t]];
      out.q_flow_pu[n][t] = sol.x[qf[n][t]];
      out.p_inj_pu[n][t] = (day.pv_kw[n][t] + out.shed_kw[n][t] - day.fix_kw[n][t] - hp) / sb;
      out.q_inj_pu[n][t] = st.rar * (-day.fix_kw[n][t] - hp) / sb;
      if (net.nodes[n].is_substation) out.pcc_mw[t] -= units::kw_to_mw(out.p_flow_pu[n][t] * sb);
    }
  }
  out.objective_eur = opf_cost(out, prices, dt, st.voll_eur_mwh);
  return out;
}

}  // namespace flexbid::grid
