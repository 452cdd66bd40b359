// Integrated dispatch on a hand-built three-node feeder, with and without
// heat-pump flexibility.

#include <cmath>
#include <cstdio>

#include "flexbid/grid.hpp"

int main() {
  using namespace flexbid;
  grid::RadialNetwork net;
  net.s_base_kva = 100.0;
  grid::Node sub{"sub", std::nullopt, 0.0, true, 30.0, 1.0, {0, 0}};
  grid::Node a{"a", "sub", 12.0, false, 0.0, 1.0, {80, 0}};
  grid::Node b{"b", "a", 12.0, false, 0.0, 1.0, {160, 0}};
  net.nodes = {sub, a, b};
  net.lines = {{"a", "sub", 0.02, 0.01, 0.3}, {"b", "a", 0.02, 0.01, 0.3}};

  std::vector<thermal::BuildingParams> houses;
  for (int i = 0; i < 4; ++i) {
    thermal::BuildingParams h;
    h.id = "h" + std::to_string(i);
    h.position = {150.0 + 5 * i, 5.0};
    h.r_th = 6.0;
    h.c_th = 12.0;
    h.p_hp_rated = 5.0;
    h.has_hp = true;
    houses.push_back(h);
  }
  grid::AllocationResult alloc = grid::allocate_buildings(houses, net);

  thermal::ComfortConfig cfg;
  std::vector<double> t_out(24), prices(24);
  grid::GridTimeSeries series{std::vector<double>(24), std::vector<double>(24, 0.0)};
  for (int h = 0; h < 24; ++h) {
    t_out[h] = 2.0 + 3.0 * std::sin((h - 9) * 3.14159 / 12);
    prices[h] = 110.0 + 50.0 * std::sin((h - 12) * 3.14159 / 12);
    series.slf[h] = h >= 17 && h <= 20 ? 1.0 : 0.55;
  }
  grid::GridDay day = grid::prepare_grid_day(net, houses, alloc, cfg, t_out, series, grid::GridSettings{});
  grid::OpfSolution fixed = grid::integrated_dispatch(day, prices, grid::Flexibility::Inflexible);
  grid::OpfSolution flex = grid::integrated_dispatch(day, prices);

  std::printf("hour  pcc_fixed_kW  pcc_flex_kW  shed_fixed_kW\n");
  for (int h = 0; h < 24; ++h) {
    double shed = 0.0;
    for (const auto& node : fixed.shed_kw) shed += node[h];
    std::printf("%4d  %12.2f  %11.2f  %13.2f\n", h, fixed.pcc_mw[h] * 1000, flex.pcc_mw[h] * 1000, shed);
  }
  std::printf("cost fixed %.2f EUR, flexible %.2f EUR\n", fixed.objective_eur, flex.objective_eur);
}
