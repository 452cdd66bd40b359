// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "flexbid/clearing.hpp"
#include "flexbid/report.hpp"
#include "flexbid/simulate.hpp"

using namespace flexbid;
using fixtures::small_case;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// Campaign shared by the efficiency criteria: 30 buildings, 30 days,
// persistence forecast.
std::pair<Instance, CampaignConfig> campaign_case(int buildings = 30, int days = 30, std::uint64_t seed = 1) {
  synthetic::SyntheticSpec spec;
  spec.buildings = buildings;
  spec.days = days;
  spec.history_days = 31;
  spec.seed = seed;
  return small_case(spec);
}

// Constraint re-check of one schedule against the thermal model.
bool schedule_ok(const thermal::BuildingParams& b, const thermal::ComfortConfig& cfg, const std::vector<double>& t_out,
                 const PowerProfile& kw, double e_base, std::string& why) {
  for (double p : kw)
    if (p < -1e-6 || p > b.p_hp_rated + 1e-6) {
      why = b.id + ": power " + fmt(p) + " outside [0, " + fmt(b.p_hp_rated) + "]";
      return false;
    }
  for (double t : thermal::simulate_temperature(b, cfg, t_out, kw))
    if (t < cfg.t_min - 1e-6 || t > cfg.t_max + 1e-6) {
      why = b.id + ": temperature " + fmt(t) + " outside the comfort band";
      return false;
    }
  double e = 0.0;
  for (double p : kw) e += p * cfg.dt;
  if (std::abs(e - e_base) > 1e-6 * std::max(1.0, e_base)) {
    why = b.id + ": energy " + fmt(e, 12) + " vs baseline " + fmt(e_base, 12);
    return false;
  }
  return true;
}

const thermal::BuildingParams& find_building(const std::vector<thermal::BuildingParams>& bs, const std::string& id) {
  for (const auto& b : bs)
    if (b.id == id) return b;
  fail(ErrorCode::DanglingReference, id);
}

// --- 1 -----------------------------------------------------------------------

Verdict clearing_oracle() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> nbids(1, 24);
  std::normal_distribution<double> power(0.0, 0.5), price(100.0, 60.0), bid_price(0.0, 30.0);
  auto t0 = Clock::now();
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    bidding::ExclusiveGroup g;
    int n = nbids(rng);
    for (int b = 0; b < n; ++b) {
      bidding::BlockBid bid;
      for (int t = 0; t < 24; ++t) bid.profile_mw.push_back(power(rng));
      bid.price_eur = bid_price(rng);
      g.bids.push_back(bid);
    }
    std::vector<double> prices(24);
    for (double& p : prices) p = price(rng);
    auto o = clearing::clear(g, prices);
    // Independent enumeration: rejection and every simplex vertex.
    double best = 0.0;
    for (const auto& bid : g.bids) {
      double cost = 0.0;
      for (int t = 0; t < 24; ++t) cost += prices[t] * bid.profile_mw[t];
      best = std::max(best, bid.price_eur - cost);
    }
    worst = std::max(worst, std::abs(o.surplus_eur - best));
    worst = std::max(worst, std::abs(clearing::clear_oracle(g, prices).surplus_eur - best));
  }
  double elapsed = seconds_since(t0);
  return {worst <= 1e-9 && elapsed < 5.0,
          "1000 groups, max surplus gap " + fmt(worst) + " EUR, " + fmt(elapsed, 3) + " s"};
}

// --- 2 and 3 -----------------------------------------------------------------

struct DispatchAudit {
  int days = 0;
  int schedules = 0;
  double worst_sum_gap_mw = 0.0;
  std::string first_violation;
  std::string energy_violation;
};

// Bids every day, then checks the cleared and a random convex acceptance
// against the aggregate and the thermal constraints. Also checks energy on
// every scenario schedule.
DispatchAudit audit_dispatch(int days) {
  auto [inst, cfg] = campaign_case(10, days, 7);
  cfg.scenarios = 8;
  simulate::Prepared p = simulate::prepare(cfg, inst);
  std::mt19937_64 rng(99);
  DispatchAudit a;
  for (Date d : cfg.days()) {
    auto ctx = simulate::make_day_context(cfg, inst, d, p.buildings, nullptr);
    auto bid = simulate::bid_day(cfg, inst, ctx);
    if (!bid.eg) continue;
    ++a.days;
    const auto& eg = *bid.eg;
    for (const auto& sched : bid.schedules)
      for (std::size_t r = 0; r < sched.size(); ++r) {
        ++a.schedules;
        std::string why;
        double e = 0.0;
        for (double kw : sched[r].schedule_kw) e += kw * cfg.comfort.dt;
        if (std::abs(e - sched[r].e_base_kwh) > 1e-6 * std::max(1.0, sched[r].e_base_kwh) && a.energy_violation.empty())
          a.energy_violation = d.iso() + " " + sched[r].id + ": " + fmt(e, 12) + " vs " + fmt(sched[r].e_base_kwh, 12);
      }

    std::vector<std::vector<double>> alphas;
    alphas.push_back(clearing::clear(eg.group, ctx.realized, cfg.comfort.dt).alpha);
    std::vector<double> w(eg.group.size());
    double total = 0.0;
    for (double& x : w) total += (x = std::exponential_distribution<double>(1.0)(rng));
    for (double& x : w) x /= total;
    alphas.push_back(w);

    for (const auto& alpha : alphas) {
      double accepted = 0.0;
      for (double x : alpha) accepted += x;
      if (accepted == 0.0) continue;
      auto dis = bidding::disaggregate(eg.ledger, alpha);
      for (int t = 0; t < cfg.comfort.horizon; ++t) {
        double sum = 0.0, ref = 0.0;
        for (const auto& [id, kw] : dis) sum += kw[t] / 1000.0;
        for (std::size_t b = 0; b < alpha.size(); ++b) ref += alpha[b] * eg.group.bids[b].profile_mw[t];
        a.worst_sum_gap_mw = std::max(a.worst_sum_gap_mw, std::abs(sum - ref));
      }
      for (std::size_t i = 0; i < ctx.flexible.size(); ++i) {
        std::string why;
        const auto& b = ctx.flexible[i];
        if (!schedule_ok(b, cfg.comfort, ctx.t_out, dis.at(b.id), ctx.baselines[i].energy_kwh, why) &&
            a.first_violation.empty())
          a.first_violation = d.iso() + " " + why;
      }
    }
  }
  return a;
}

// --- 4 -----------------------------------------------------------------------

Verdict perfect_foresight() {
  auto [inst, cfg] = campaign_case();
  cfg.scenarios = 23;  // plus the injected realized prices: 24 bids
  cfg.inject_realized = true;
  auto rep = simulate::run_campaign(cfg, inst);
  double worst = 0.0;
  int defined = 0;
  for (const auto& d : rep.days) {
    if (std::isnan(d.eta)) continue;
    ++defined;
    worst = std::max(worst, std::abs(d.eta - 1.0));
  }
  bool ok = rep.failures.empty() && defined == static_cast<int>(rep.days.size()) && worst <= 1e-4;
  return {ok, fmt(defined) + "/" + fmt(rep.days.size()) + " days with defined eta, max |eta - 1| = " + fmt(worst) +
                  ", failures " + fmt(rep.failures.size())};
}

// --- 5 and 6 -----------------------------------------------------------------

struct BidsSweep {
  std::vector<report::BidsRow> rows;
  std::string detail;
};

BidsSweep bids_sweep() {
  auto [inst, cfg] = campaign_case();
  BidsSweep s;
  s.rows = report::efficiency_vs_bids(cfg, inst, {1, 2, 4, 8, 16, 24});
  for (const auto& r : s.rows) s.detail += " B=" + fmt(r.bids) + ":" + fmt(r.eta_weighted, 5);
  return s;
}

Verdict monotone(const BidsSweep& s) {
  bool ok = true;
  for (std::size_t i = 1; i < s.rows.size(); ++i) {
    ok = ok && s.rows[i].eta_weighted >= s.rows[i - 1].eta_weighted - 1e-9;
    ok = ok && s.rows[i].tc_cleared_eur <= s.rows[i - 1].tc_cleared_eur + 1e-9;
  }
  double gain = s.rows.back().eta_weighted - s.rows.front().eta_weighted;
  ok = ok && gain > 0.0;
  return {ok, "eta(B) cost-weighted" + s.detail + ", eta(24) - eta(1) = " + fmt(gain)};
}

Verdict magnitude(const BidsSweep& s) {
  const auto& last = s.rows.back();
  return {last.eta_weighted >= 0.90,
          "eta(B=24) = " + fmt(last.eta_weighted, 5) + " cost-weighted, " + fmt(last.eta_mean, 5) + " daily mean"};
}

// --- 7 -----------------------------------------------------------------------

Verdict lindistflow_hand_check() {
  double u_closed = grid::child_squared_voltage(1.0, -0.5, 0.0, 0.01, 0.0);
  auto net = fixtures::two_bus(500.0, 10000.0, 10.0, 0.01, 0.0);
  grid::GridSettings st;
  st.rar = 0.0;
  thermal::ComfortConfig cfg;
  auto day = grid::prepare_grid_day(net, {}, {}, cfg, std::vector<double>(24, 5.0), fixtures::constant_series(1.0, 0.0), st);
  auto sol = grid::integrated_dispatch(day, std::vector<double>(24, 100.0));
  double u_gap = std::max(std::abs(u_closed - 0.99), std::abs(sol.u_pu2[1][0] - 0.99));

  // Stressed: 0.5 pu demand behind a 0.4 pu substation in hour 0.
  auto stressed = fixtures::two_bus(500.0, 400.0, 10.0, 0.01, 0.0);
  auto series = fixtures::constant_series(0.5, 0.0);
  series.slf[0] = 1.0;
  auto sday = grid::prepare_grid_day(stressed, {}, {}, cfg, std::vector<double>(24, 5.0), series, st);
  auto ssol = grid::integrated_dispatch(sday, std::vector<double>(24, 100.0), grid::Flexibility::Inflexible);
  double shed_gap = std::abs(ssol.shed_kw[1][0] / stressed.s_base_kva - 0.1);
  for (int t = 1; t < 24; ++t) shed_gap = std::max(shed_gap, std::abs(ssol.shed_kw[1][t]));
  return {u_gap <= 1e-9 && shed_gap <= 1e-6,
          "U_child gap " + fmt(u_gap) + " pu^2, shedding gap " + fmt(shed_gap) + " pu"};
}

// --- 8 -----------------------------------------------------------------------

Verdict network_safety() {
  auto [inst, cfg] = campaign_case(30, 10, 3);
  cfg.mode = UtilityMode::Integrated;
  grid::RadialNetwork net = *inst.network;
  auto alloc = grid::allocate_buildings(inst.buildings, net);
  auto topo = grid::validate_radial(net);
  grid::RadialNetwork big = net;
  for (auto& l : big.lines) l.s_rating_pu *= 10;
  for (auto& n : big.nodes) n.s_rating_kva *= 10;

  double shed_big = 0.0, worst_circle = 0.0, worst_voltage = 0.0;
  int hours = 0;
  auto check = [&](const grid::RadialNetwork& n, const grid::OpfSolution& sol) {
    for (int t = 0; t < cfg.comfort.horizon; ++t) {
      ++hours;
      for (std::size_t k = 0; k < n.nodes.size(); ++k) {
        double rating = n.nodes[k].is_substation ? n.nodes[k].s_rating_kva / n.s_base_kva
                                                 : n.lines[topo.line_of[k]].s_rating_pu;
        double p = sol.p_flow_pu[k][t], q = sol.q_flow_pu[k][t];
        worst_circle = std::max(worst_circle, std::hypot(p, q) - rating);
        double u = sol.u_pu2[k][t];
        worst_voltage = std::max({worst_voltage, cfg.grid.v_min_pu * cfg.grid.v_min_pu - u,
                                  u - cfg.grid.v_max_pu * cfg.grid.v_max_pu});
      }
    }
  };
  for (Date d : cfg.days()) {
    for (const auto* n : {&net, &big}) {
      auto day = grid::prepare_grid_day(*n, inst.buildings, alloc, cfg.comfort, inst.t_out(d), inst.profiles.at(d), cfg.grid);
      for (auto flex : {grid::Flexibility::Flexible, grid::Flexibility::Inflexible}) {
        auto sol = grid::integrated_dispatch(day, inst.prices.at(d).realized, flex);
        check(*n, sol);
        if (n == &big) shed_big += grid::opf_shed_kwh(sol, cfg.comfort.dt);
      }
    }
  }
  bool ok = shed_big <= 1e-6 && worst_circle <= 1e-9 && worst_voltage <= 1e-9;
  return {ok, fmt(hours) + " solved hours, shedding at 10x ratings " + fmt(shed_big) + " kWh, max circle excess " +
                  fmt(std::max(0.0, worst_circle)) + " pu, max voltage excess " + fmt(std::max(0.0, worst_voltage)) + " pu^2"};
}

// --- 9 -----------------------------------------------------------------------

double median3(const std::function<double()>& f) {
  std::vector<double> v{f(), f(), f()};
  std::sort(v.begin(), v.end());
  return v[1];
}

double dispatch_seconds(int buildings, int scenarios) {
  auto [inst, cfg] = campaign_case(buildings, 1, 11);
  cfg.scenarios = cfg.max_bids = scenarios;
  simulate::Prepared p = simulate::prepare(cfg, inst);
  auto ctx = simulate::make_day_context(cfg, inst, cfg.start, p.buildings, nullptr);
  return median3([&] { return simulate::bid_day(cfg, inst, ctx).dispatch_s; });
}

Verdict runtime_scaling() {
  auto t0 = Clock::now();
  double r200 = dispatch_seconds(200, 24), r400 = dispatch_seconds(400, 24);
  double b4 = dispatch_seconds(50, 4), b24 = dispatch_seconds(50, 24);
  double ratio_r = r400 / r200;
  double ratio_b = b24 / (6.0 * b4);
  bool ok = ratio_r <= 2.5 && ratio_b <= 2.5 && ratio_b >= 1.0 / 2.5;
  return {ok, "R=200 " + fmt(r200, 3) + " s, R=400 " + fmt(r400, 3) + " s (ratio " + fmt(ratio_r, 3) + "); B=4 " +
                  fmt(b4, 3) + " s, B=24 " + fmt(b24, 3) + " s (vs linear " + fmt(ratio_b, 3) + "x); total " +
                  fmt(seconds_since(t0), 3) + " s"};
}

// --- 10 ----------------------------------------------------------------------

Verdict ordering() {
  auto [inst, cfg] = campaign_case(30, 10, 5);
  cfg.scenarios = 8;
  auto unb = simulate::run_campaign(cfg, inst);
  cfg.mode = UtilityMode::Integrated;
  auto integ = simulate::run_campaign(cfg, inst);
  int violations = 0, days = 0;
  double worst_gap = 0.0;
  for (const auto* rep : {&unb, &integ})
    for (const auto& d : rep->days) {
      ++days;
      if (d.tc_opt > d.tc_cleared + 1e-6 || d.tc_opt > d.tc_inf + 1e-6) ++violations;
    }
  // Identical inputs: HP cost under grid constraints cannot beat the
  // unconstrained optimum.
  bool same_days = unb.days.size() == integ.days.size();
  for (std::size_t i = 0; same_days && i < unb.days.size(); ++i) {
    double gap = unb.days[i].tc_opt_hp - integ.days[i].tc_opt_hp;
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-6) ++violations;
  }
  bool ok = violations == 0 && same_days && unb.failures.empty() && integ.failures.empty();
  return {ok, fmt(days) + " simulated days, " + fmt(violations) + " violations, integrated HP optimum minus unbundled " +
                  fmt(integ.tc_opt_hp - unb.tc_opt_hp) + " EUR (worst daily shortfall " + fmt(worst_gap) + ")"};
}

// --- 11 ----------------------------------------------------------------------

Verdict allocation_oracle() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> pos(0, 300), hp(2, 6), pv(0, 6);
  auto make_net = [&](int nodes, double cap_lo, double cap_hi) {
    std::uniform_real_distribution<double> cap(cap_lo, cap_hi);
    grid::RadialNetwork net;
    net.nodes.push_back(fixtures::substation("n0", 1000, pos(rng), pos(rng)));
    net.nodes[0].p_cap_kw = cap(rng);
    for (int k = 1; k < nodes; ++k) {
      std::string id = "n" + std::to_string(k);
      net.nodes.push_back(fixtures::node(id, "n0", cap(rng), pos(rng), pos(rng)));
      net.lines.push_back(fixtures::line(id, "n0", 0.01, 0.01, 1));
    }
    return net;
  };
  auto make_buildings = [&](int n) {
    std::vector<thermal::BuildingParams> out;
    for (int i = 0; i < n; ++i) {
      thermal::BuildingParams b;
      b.id = "b" + std::to_string(i);
      b.position = {pos(rng), pos(rng)};
      b.p_hp_rated = hp(rng);
      b.p_pv_rated = pv(rng);
      b.has_hp = rng() % 4 != 0;
      out.push_back(b);
    }
    return out;
  };

  double worst_greedy = 0.0, worst_enum = 0.0;
  int infeasible_ok = 0, infeasible_bad = 0, tight = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto net = make_net(1 + static_cast<int>(rng() % 5), 1000, 1000);
    auto bs = make_buildings(1 + static_cast<int>(rng() % 8));
    double greedy = 0.0;
    for (const auto& b : bs) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& n : net.nodes) best = std::min(best, grid::distance(b.position, n.position));
      greedy += best;
    }
    worst_greedy = std::max(worst_greedy, std::abs(grid::allocate_buildings(bs, net).total_distance_m - greedy));
  }
  for (int trial = 0; trial < 50; ++trial) {
    auto net = make_net(1 + static_cast<int>(rng() % 4), 4, 10);
    auto bs = make_buildings(1 + static_cast<int>(rng() % 4));
    const std::size_t nb = bs.size(), nn = net.nodes.size();
    std::vector<std::size_t> choice(nb, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
      std::vector<double> hp_load(nn, 0.0), pv_load(nn, 0.0);
      double dist = 0.0;
      for (std::size_t b = 0; b < nb; ++b) {
        hp_load[choice[b]] += bs[b].has_hp ? bs[b].p_hp_rated : 0.0;
        pv_load[choice[b]] += bs[b].p_pv_rated;
        dist += grid::distance(bs[b].position, net.nodes[choice[b]].position);
      }
      bool ok = true;
      for (std::size_t n = 0; n < nn; ++n)
        ok = ok && hp_load[n] <= net.nodes[n].p_cap_kw && pv_load[n] <= net.nodes[n].p_cap_kw;
      if (ok) best = std::min(best, dist);
      std::size_t i = 0;
      while (i < nb && ++choice[i] == nn) choice[i++] = 0;
      if (i == nb) break;
    }
    try {
      double milp = grid::allocate_buildings(bs, net).total_distance_m;
      if (!std::isfinite(best)) {
        ++infeasible_bad;
      } else {
        worst_enum = std::max(worst_enum, std::abs(milp - best));
        ++tight;
      }
    } catch (const Error& e) {
      (std::isfinite(best) || e.code() != ErrorCode::Infeasible) ? ++infeasible_bad : ++infeasible_ok;
    }
  }
  bool ok = worst_greedy <= 1e-9 && worst_enum <= 1e-9 && infeasible_bad == 0;
  return {ok, "uncapacitated gap " + fmt(worst_greedy) + " m over 50 instances; tight gap " + fmt(worst_enum) + " m over " +
                  fmt(tight) + " feasible instances, " + fmt(infeasible_ok) + " infeasible matched, " +
                  fmt(infeasible_bad) + " mismatched"};
}

}  // namespace

int main() {
  log::threshold() = log::Level::Quiet;
  int failed = 0;
  auto report = [&](int id, const std::function<Verdict()>& f) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = f();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %d: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  };

  report(1, clearing_oracle);
  DispatchAudit audit;
  report(2, [&] {
    audit = audit_dispatch(100);
    bool ok = audit.worst_sum_gap_mw <= 1e-9 && audit.first_violation.empty() && audit.days == 100;
    return Verdict{ok, fmt(audit.days) + " days, max aggregate gap " + fmt(audit.worst_sum_gap_mw) + " MW" +
                           (audit.first_violation.empty() ? "" : ", " + audit.first_violation)};
  });
  report(3, [&] {
    return Verdict{audit.energy_violation.empty() && audit.schedules > 0,
                   fmt(audit.schedules) + " dispatched schedules checked" +
                       (audit.energy_violation.empty() ? "" : ", " + audit.energy_violation)};
  });
  report(4, perfect_foresight);
  BidsSweep sweep;
  report(5, [&] {
    sweep = bids_sweep();
    return monotone(sweep);
  });
  report(6, [&] { return sweep.rows.empty() ? Verdict{false, "no sweep"} : magnitude(sweep); });
  report(7, lindistflow_hand_check);
  report(8, network_safety);
  report(9, runtime_scaling);
  report(10, ordering);
  report(11, allocation_oracle);
  return failed;
}
