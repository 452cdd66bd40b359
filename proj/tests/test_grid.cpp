#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flexbid/grid.hpp"
#include "flexbid/synthetic.hpp"
#include "fixtures.hpp"

using namespace flexbid;
using namespace flexbid::grid;
using namespace fixtures;

namespace {

ErrorCode code_of(const RadialNetwork& net) {
  try {
    validate_radial(net);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::IoError;
}

RadialNetwork chain() {
  RadialNetwork net;
  net.nodes = {substation("sub", 500), node("a", "sub", 50), node("b", "a", 50)};
  net.lines = {line("a", "sub", 0.01, 0.01, 1), line("b", "a", 0.01, 0.01, 1)};
  return net;
}

thermal::BuildingParams building(const std::string& id, double x, double y, double hp, double pv, bool has_hp = true) {
  thermal::BuildingParams b;
  b.id = id;
  b.position = {x, y};
  b.r_th = 6.0;
  b.c_th = 10.0;
  b.p_hp_rated = hp;
  b.p_pv_rated = pv;
  b.has_hp = has_hp;
  return b;
}

std::vector<double> sine_day(double mean, double amp) {
  std::vector<double> v(24);
  for (int h = 0; h < 24; ++h) v[h] = mean + amp * std::sin(2 * 3.14159265358979 * (h - 9) / 24.0);
  return v;
}

}  // namespace

TEST(ValidateRadial, ChainIsOk) {
  auto topo = validate_radial(chain());
  EXPECT_EQ(topo.substations, (std::vector<int>{0}));
  EXPECT_EQ(topo.ancestor[2], 1);
  EXPECT_EQ(topo.order, (std::vector<int>{0, 1, 2}));
}

TEST(ValidateRadial, DetectsCycle) {
  auto net = chain();
  net.nodes[0].is_substation = false;
  net.nodes[0].ancestor = "b";
  net.nodes.push_back(substation("root", 500));
  net.lines.push_back(line("sub", "b", 0.01, 0.01, 1));
  EXPECT_EQ(code_of(net), ErrorCode::CycleDetected);
}

TEST(ValidateRadial, DetectsIsolatedNode) {
  auto net = chain();
  grid::Node lonely;
  lonely.id = "iso";
  net.nodes.push_back(lonely);
  EXPECT_EQ(code_of(net), ErrorCode::DisconnectedNode);
}

TEST(ValidateRadial, DetectsMultipleAncestors) {
  auto net = chain();
  net.lines.push_back(line("b", "sub", 0.01, 0.01, 1));
  EXPECT_EQ(code_of(net), ErrorCode::MultipleAncestors);
}

TEST(ValidateRadial, DetectsDanglingLine) {
  auto net = chain();
  net.lines.push_back(line("c", "a", 0.01, 0.01, 1));
  EXPECT_EQ(code_of(net), ErrorCode::DanglingReference);
}

TEST(Polygon, InscribedAndTouchesAxes) {
  for (int n : {4, 8, 16}) {
    auto facets = inscribed_polygon(2.0, n);
    for (int k = 0; k < 360; ++k) {
      // Points on the polygon boundary along each ray lie inside the circle.
      double th = k * 3.14159265358979 / 180.0;
      double scale = std::numeric_limits<double>::infinity();
      for (const auto& f : facets) {
        double d = f.cp * std::cos(th) + f.cq * std::sin(th);
        if (d > 0) scale = std::min(scale, f.rhs / d);
      }
      EXPECT_LE(scale, 2.0 + 1e-12);
    }
    for (const auto& f : facets) EXPECT_LE(f.cp * 2.0, f.rhs + 1e-12);  // (S, 0) is feasible
  }
}

TEST(LinDistFlow, TwoBusHandCheck) {
  EXPECT_NEAR(child_squared_voltage(1.0, -0.5, 0.0, 0.01, 0.02), 0.99, 1e-12);

  auto net = two_bus(500.0, 10000.0, 10.0, 0.01, 0.02);
  GridSettings st;
  st.rar = 0.0;
  thermal::ComfortConfig cfg;
  auto day = prepare_grid_day(net, {}, {}, cfg, std::vector<double>(24, 5.0), constant_series(1.0, 0.0), st);
  auto sol = integrated_dispatch(day, std::vector<double>(24, 100.0));
  for (int t = 0; t < 24; ++t) {
    EXPECT_NEAR(sol.u_pu2[0][t], 1.0, 1e-12);
    EXPECT_NEAR(sol.u_pu2[1][t], 0.99, 1e-9);
    EXPECT_NEAR(sol.p_flow_pu[1][t], -0.5, 1e-9);
    EXPECT_NEAR(sol.pcc_mw[t], 0.5, 1e-9);
    EXPECT_NEAR(sol.shed_kw[1][t], 0.0, 1e-6);
  }
  EXPECT_NEAR(sol.objective_eur, 24 * 100.0 * 0.5, 1e-6);
}

TEST(LinDistFlow, StressedSubstationShedsTheOverload) {
  // 0.5 pu demand in hour 0 against a 0.4 pu substation, 0.25 pu elsewhere.
  auto net = two_bus(500.0, 400.0, 10.0, 0.01, 0.02);
  GridSettings st;
  st.rar = 0.0;
  thermal::ComfortConfig cfg;
  auto series = constant_series(0.5, 0.0);
  series.slf[0] = 1.0;
  auto day = prepare_grid_day(net, {}, {}, cfg, std::vector<double>(24, 5.0), series, st);
  auto sol = integrated_dispatch(day, std::vector<double>(24, 100.0), Flexibility::Inflexible);
  EXPECT_NEAR(sol.shed_kw[1][0] / net.s_base_kva, 0.1, 1e-6);
  for (int t = 1; t < 24; ++t) EXPECT_NEAR(sol.shed_kw[1][t], 0.0, 1e-6);
  EXPECT_NEAR(opf_shed_kwh(sol, 1.0), 100.0, 1e-3);
}

TEST(LinDistFlow, GenerousNetworkMatchesUnbundledDispatch) {
  auto net = two_bus(20.0, 10000.0, 10.0, 0.001, 0.001);
  auto b = building("h", 100, 0, 5.0, 0.0);
  AllocationResult alloc;
  alloc.node_of["h"] = "a";
  thermal::ComfortConfig cfg;
  auto t_out = sine_day(2.0, 4.0);
  auto prices = sine_day(100.0, 40.0);
  auto day = prepare_grid_day(net, {b}, alloc, cfg, t_out, constant_series(0.6, 0.0), GridSettings{});
  auto sol = integrated_dispatch(day, prices);
  auto base = thermal::baseline_profile(b, cfg, t_out);
  auto unb = thermal::dispatch(b, cfg, t_out, prices, base.energy_kwh);
  ASSERT_EQ(sol.buildings.size(), 1u);
  EXPECT_NEAR(sol.buildings[0].cost_eur, unb.cost_eur, 1e-6);
  EXPECT_NEAR(opf_shed_kwh(sol, 1.0), 0.0, 1e-6);
}

TEST(LinDistFlow, SyntheticFeederProperties) {
  synthetic::SyntheticSpec spec;
  spec.buildings = 12;
  spec.days = 1;
  spec.history_days = 1;
  spec.seed = 5;
  auto [inst, cfg] = synthetic::generate_synthetic(spec);
  RadialNetwork net = *inst.network;
  auto alloc = allocate_buildings(inst.buildings, net);
  Date d = cfg.start;
  GridSettings st;
  auto check = [&](const RadialNetwork& n, bool expect_no_shed) {
    auto day = prepare_grid_day(n, inst.buildings, alloc, cfg.comfort, inst.t_out(d), inst.profiles.at(d), st);
    auto sol = integrated_dispatch(day, inst.prices.at(d).realized);
    auto topo = validate_radial(n);
    for (int t = 0; t < 24; ++t) {
      for (std::size_t k = 0; k < n.nodes.size(); ++k) {
        double rating = n.nodes[k].is_substation ? n.nodes[k].s_rating_kva / n.s_base_kva
                                                 : n.lines[topo.line_of[k]].s_rating_pu;
        double p = sol.p_flow_pu[k][t], q = sol.q_flow_pu[k][t];
        EXPECT_LE(p * p + q * q, rating * rating * (1 + 1e-9) + 1e-12);
        if (n.nodes[k].is_substation) {
          EXPECT_NEAR(sol.u_pu2[k][t], 1.0, 1e-9);
        } else {
          EXPECT_GE(sol.u_pu2[k][t], 0.97 * 0.97 - 1e-9);
          EXPECT_LE(sol.u_pu2[k][t], 1.03 * 1.03 + 1e-9);
        }
        // Upstream flow = children's flows + injection.
        double children = 0.0;
        for (int c : topo.children[k]) children += sol.p_flow_pu[c][t];
        EXPECT_NEAR(sol.p_flow_pu[k][t], children + sol.p_inj_pu[k][t], 1e-6);
      }
    }
    if (expect_no_shed) {
      EXPECT_NEAR(opf_shed_kwh(sol, 1.0), 0.0, 1e-6);
    }
    return sol;
  };
  check(net, false);
  RadialNetwork big = net;
  for (auto& l : big.lines) {
    l.s_rating_pu *= 10;
    l.r_pu /= 10;
    l.x_pu /= 10;
  }
  for (auto& n : big.nodes) n.s_rating_kva *= 10;
  check(big, true);
}

TEST(Allocation, SingleBuilding) {
  RadialNetwork net;
  net.nodes = {substation("sub", 100), node("a", "sub", 10, 5, 0)};
  net.nodes[0].p_cap_kw = 10;
  net.lines = {line("a", "sub", 0.01, 0.01, 1)};
  auto r = allocate_buildings({building("b1", 0, 0, 3, 0)}, net);
  EXPECT_EQ(r.node_of.at("b1"), "sub");
  EXPECT_NEAR(r.total_distance_m, 0.0, 1e-12);
}

TEST(Allocation, CapacitySpillsToFartherNode) {
  RadialNetwork net;
  net.nodes = {substation("A", 100, 0, 0), node("B", "A", 10, 30, 40)};
  net.nodes[0].p_cap_kw = 5;
  net.lines = {line("B", "A", 0.01, 0.01, 1)};
  auto r = allocate_buildings({building("b1", 0, 0, 4, 0), building("b2", 0, 0, 4, 0)}, net);
  int at_a = (r.node_of["b1"] == "A") + (r.node_of["b2"] == "A");
  EXPECT_EQ(at_a, 1);
  EXPECT_NEAR(r.total_distance_m, 50.0, 1e-9);
}

TEST(Allocation, InfeasibleNamesBindingFamily) {
  RadialNetwork net;
  net.nodes = {substation("A", 100, 0, 0), node("B", "A", 5, 30, 40)};
  net.nodes[0].p_cap_kw = 5;
  net.lines = {line("B", "A", 0.01, 0.01, 1)};
  // Total capacity suffices (10 kW) but each node holds only one 3 kW heat pump.
  std::vector<thermal::BuildingParams> bs{building("b1", 0, 0, 3, 0), building("b2", 0, 0, 3, 0),
                                          building("b3", 0, 0, 3, 0)};
  try {
    allocate_buildings(bs, net);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    EXPECT_NE(std::string(e.what()).find("HP capacity"), std::string::npos) << e.what();
  }
}

TEST(Allocation, CountsOnlyInstalledHeatPumps) {
  RadialNetwork net;
  net.nodes = {substation("A", 100, 0, 0), node("B", "A", 100, 500, 0)};
  net.nodes[0].p_cap_kw = 1;
  net.lines = {line("B", "A", 0.01, 0.01, 1)};
  auto r = allocate_buildings({building("b1", 0, 0, 8, 0, false)}, net);
  EXPECT_EQ(r.node_of.at("b1"), "A");
}

namespace {

// Exhaustive minimum over all assignments respecting both capacity families.
double enumerate_allocation(const std::vector<thermal::BuildingParams>& bs, const RadialNetwork& net) {
  const std::size_t nb = bs.size(), nn = net.nodes.size();
  std::vector<std::size_t> choice(nb, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<double> hp(nn, 0.0), pv(nn, 0.0);
    double dist = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      hp[choice[b]] += hp_load_kw(bs[b]);
      pv[choice[b]] += bs[b].p_pv_rated;
      dist += distance(bs[b].position, net.nodes[choice[b]].position);
    }
    bool ok = true;
    for (std::size_t n = 0; n < nn; ++n) ok = ok && hp[n] <= net.nodes[n].p_cap_kw + 1e-9 && pv[n] <= net.nodes[n].p_cap_kw + 1e-9;
    if (ok) best = std::min(best, dist);
    std::size_t i = 0;
    while (i < nb && ++choice[i] == nn) choice[i++] = 0;
    if (i == nb) break;
  }
  return best;
}

RadialNetwork random_star(std::mt19937_64& rng, int nodes, double cap_lo, double cap_hi) {
  std::uniform_real_distribution<double> pos(0, 200), cap(cap_lo, cap_hi);
  RadialNetwork net;
  net.nodes.push_back(substation("n0", 1000, pos(rng), pos(rng)));
  net.nodes[0].p_cap_kw = cap(rng);
  for (int k = 1; k < nodes; ++k) {
    std::string id = "n" + std::to_string(k);
    net.nodes.push_back(node(id, "n0", cap(rng), pos(rng), pos(rng)));
    net.lines.push_back(line(id, "n0", 0.01, 0.01, 1));
  }
  return net;
}

std::vector<thermal::BuildingParams> random_buildings(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> pos(0, 200), hp(2, 6), pv(0, 6);
  std::vector<thermal::BuildingParams> out;
  for (int i = 0; i < n; ++i)
    out.push_back(building("b" + std::to_string(i), pos(rng), pos(rng), hp(rng), pv(rng), rng() % 4 != 0));
  return out;
}

}  // namespace

TEST(Allocation, UncapacitatedMatchesNearestNode) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto net = random_star(rng, 5, 1000, 1000);
    auto bs = random_buildings(rng, 8);
    auto r = allocate_buildings(bs, net);
    double greedy = 0.0;
    for (const auto& b : bs) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& n : net.nodes) best = std::min(best, distance(b.position, n.position));
      greedy += best;
    }
    EXPECT_NEAR(r.total_distance_m, greedy, 1e-6);
    EXPECT_NEAR(allocation_distance(bs, net, r), r.total_distance_m, 1e-9);
  }
}

TEST(Allocation, TightCapacityMatchesEnumeration) {
  std::mt19937_64 rng(12);
  int solved = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto net = random_star(rng, 4, 4, 10);
    auto bs = random_buildings(rng, 5);
    double oracle = enumerate_allocation(bs, net);
    if (!std::isfinite(oracle)) {
      try {
        allocate_buildings(bs, net);
        ADD_FAILURE() << "expected infeasibility in trial " << trial;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Infeasible);
      }
      continue;
    }
    auto r = allocate_buildings(bs, net);
    EXPECT_NEAR(r.total_distance_m, oracle, 1e-6 * std::max(1.0, oracle)) << "trial " << trial;
    ++solved;
  }
  EXPECT_GT(solved, 5);
}
