#pragma once

// Small networks and synthetic instances shared by the test binaries.

#include <random>
#include <string>
#include <vector>

#include "flexbid/grid.hpp"
#include "flexbid/synthetic.hpp"

namespace fixtures {

using namespace flexbid;

inline grid::Node substation(const std::string& id, double rating_kva, double x = 0, double y = 0) {
  grid::Node n;
  n.id = id;
  n.is_substation = true;
  n.s_rating_kva = rating_kva;
  n.v_nom_pu = 1.0;
  n.position = {x, y};
  return n;
}

inline grid::Node node(const std::string& id, const std::string& anc, double p_cap_kw, double x = 0, double y = 0) {
  grid::Node n;
  n.id = id;
  n.ancestor = anc;
  n.p_cap_kw = p_cap_kw;
  n.position = {x, y};
  return n;
}

inline grid::Line line(const std::string& from, const std::string& to, double r, double x, double rating) {
  return {from, to, r, x, rating};
}

/// Substation and one child drawing `p_cap_kw` at SLF = 1.
inline grid::RadialNetwork two_bus(double p_cap_kw, double sub_rating_kva, double line_rating_pu, double r, double x) {
  grid::RadialNetwork net;
  net.nodes = {substation("sub", sub_rating_kva), node("a", "sub", p_cap_kw, 100, 0)};
  net.lines = {line("a", "sub", r, x, line_rating_pu)};
  return net;
}

inline grid::GridTimeSeries constant_series(double slf, double cf, int horizon = 24) {
  return {std::vector<double>(horizon, slf), std::vector<double>(horizon, cf)};
}

/// Small synthetic case with forecasts filled as the loader would.
inline std::pair<Instance, CampaignConfig> small_case(synthetic::SyntheticSpec spec) {
  auto out = synthetic::generate_synthetic(spec);
  scenarios::fill_missing_forecasts(out.first.prices);
  return out;
}

inline synthetic::SyntheticSpec small_spec(int buildings = 6, int days = 3, int history = 6, std::uint64_t seed = 3) {
  synthetic::SyntheticSpec spec;
  spec.buildings = buildings;
  spec.days = days;
  spec.history_days = history;
  spec.seed = seed;
  return spec;
}

}  // namespace fixtures
