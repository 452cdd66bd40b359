#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "flexbid/thermal.hpp"

using namespace flexbid;
using namespace flexbid::thermal;

namespace {

BuildingParams house(double r = 5.0, double c = 10.0, double rated = 5.0) {
  BuildingParams b;
  b.id = "h";
  b.r_th = r;
  b.c_th = c;
  b.p_hp_rated = rated;
  b.has_hp = true;
  return b;
}

ComfortConfig day_cfg(int horizon = 24) {
  ComfortConfig cfg;
  cfg.horizon = horizon;
  return cfg;
}

std::vector<double> winter_day(std::uint64_t seed, int horizon = 24) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> t(horizon);
  for (int h = 0; h < horizon; ++h) t[h] = 2.0 + 4.0 * std::sin(2 * 3.14159265 * (h - 9) / 24.0) + n(rng);
  return t;
}

std::vector<double> random_prices(std::uint64_t seed, int horizon = 24) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(20.0, 300.0);
  std::vector<double> p(horizon);
  for (auto& v : p) v = u(rng);
  return p;
}

}  // namespace

TEST(Baseline, DirectFormula) {
  auto cfg = day_cfg();
  auto r = baseline_profile(house(5.0), cfg, std::vector<double>(24, 0.0));
  for (double p : r.schedule_kw) EXPECT_DOUBLE_EQ(p, 1.0);
  EXPECT_DOUBLE_EQ(r.energy_kwh, 24.0);
  for (double t : r.temperatures) EXPECT_NEAR(t, 20.0, 1e-12);
}

TEST(Baseline, ZeroLossAndClamp) {
  auto cfg = day_cfg();
  auto at_set = baseline_profile(house(), cfg, std::vector<double>(24, 20.0));
  for (double p : at_set.schedule_kw) EXPECT_EQ(p, 0.0);
  EXPECT_EQ(at_set.energy_kwh, 0.0);
  auto warm = baseline_profile(house(), cfg, std::vector<double>(24, 25.0));
  for (double p : warm.schedule_kw) EXPECT_EQ(p, 0.0);
}

TEST(Baseline, InfeasibleWhenRatedTooSmall) {
  auto cfg = day_cfg();
  try {
    baseline_profile(house(5.0, 10.0, 0.5), cfg, std::vector<double>(24, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InfeasibleBaseline);
  }
}

TEST(SimulateTemperature, ImplicitGeometricDecay) {
  auto cfg = day_cfg();
  auto b = house(5.0, 10.0);
  auto temps = simulate_temperature(b, cfg, std::vector<double>(24, 0.0), std::vector<double>(24, 0.0));
  double factor = 1.0 / (1.0 + cfg.dt / (b.r_th * b.c_th));
  double expected = 20.0;
  for (int t = 0; t < 24; ++t) {
    expected *= factor;
    EXPECT_NEAR(temps[t], expected, 1e-12);
    if (t > 0) EXPECT_LT(temps[t], temps[t - 1]);
  }
}

TEST(SimulateTemperature, InfiniteInertia) {
  auto cfg = day_cfg();
  auto b = house(5.0, 1e6);
  auto temps = simulate_temperature(b, cfg, std::vector<double>(24, -10.0), std::vector<double>(24, 3.0));
  double prev = cfg.t_set;
  for (double t : temps) {
    EXPECT_LT(std::abs(t - prev), 1e-3);
    prev = t;
  }
}

TEST(SimulateTemperature, ExplicitVariant) {
  auto cfg = day_cfg(3);
  cfg.integration = Integration::Explicit;
  auto b = house(5.0, 10.0);
  std::vector<double> zero(3, 0.0);
  auto temps = simulate_temperature(b, cfg, zero, zero);
  EXPECT_NEAR(temps[0], 20.0 * (1.0 - 0.02), 1e-12);
  EXPECT_NEAR(temps[2], 20.0 * std::pow(0.98, 3), 1e-12);
}

TEST(Dispatch, FlatPricesCostEqualsBaseline) {
  auto cfg = day_cfg();
  auto b = house();
  auto t_out = winter_day(1);
  auto base = baseline_profile(b, cfg, t_out);
  std::vector<double> flat(24, 87.0);
  auto r = dispatch(b, cfg, t_out, flat, base.energy_kwh);
  EXPECT_NEAR(r.cost_eur, 87.0 * base.energy_kwh / 1000.0, 1e-9);
  EXPECT_NEAR(r.cost_eur, schedule_cost(base.schedule_kw, flat, cfg.dt), 1e-9);
}

TEST(Dispatch, DegenerateBandReproducesBaseline) {
  auto cfg = day_cfg();
  cfg.t_min = cfg.t_max = cfg.t_set;
  auto b = house();
  auto t_out = winter_day(2);
  auto base = baseline_profile(b, cfg, t_out);
  auto r = dispatch(b, cfg, t_out, random_prices(2), base.energy_kwh);
  EXPECT_LT(max_abs_diff(r.schedule_kw, base.schedule_kw), 1e-6);
}

// Brute force over a 0.1 kW grid with T = 4: the LP may only do better than
// the grid (which is a subset of its feasible set), and with a wide band and
// on-grid energy the LP vertex lies on the grid.
namespace {
double brute_force_cost(const BuildingParams& b, const ComfortConfig& cfg, const std::vector<double>& t_out,
                        const std::vector<double>& prices, double energy) {
  const int steps = static_cast<int>(std::lround(b.p_hp_rated / 0.1));
  const int target = static_cast<int>(std::lround(energy / 0.1));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> p(4);
  for (int a = 0; a <= steps; ++a)
    for (int c = 0; c <= steps; ++c)
      for (int d = 0; d <= steps; ++d) {
        int e = target - a - c - d;
        if (e < 0 || e > steps) continue;
        p = {a * 0.1, c * 0.1, d * 0.1, e * 0.1};
        auto temps = simulate_temperature(b, cfg, t_out, p);
        bool ok = true;
        for (double t : temps) ok = ok && t >= cfg.t_min - 1e-9 && t <= cfg.t_max + 1e-9;
        if (ok) best = std::min(best, schedule_cost(p, prices, cfg.dt));
      }
  return best;
}
}  // namespace

TEST(Dispatch, MatchesBruteForceWithWideBand) {
  auto cfg = day_cfg(4);
  cfg.t_min = 10.0;
  cfg.t_max = 30.0;
  auto b = house(5.0, 10.0, 2.0);
  std::vector<double> t_out{0.0, 0.0, 0.0, 0.0};
  std::vector<double> prices{100.0, 20.0, 80.0, 150.0};
  double energy = 4.0;  // 1 kW baseline x 4 h
  auto lp = dispatch(b, cfg, t_out, prices, energy);
  double brute = brute_force_cost(b, cfg, t_out, prices, energy);
  EXPECT_NEAR(lp.cost_eur, brute, 1e-9);
  // Cheapest hours first, up to the rated power.
  EXPECT_NEAR(lp.schedule_kw[1], 2.0, 1e-7);
  EXPECT_NEAR(lp.schedule_kw[2], 2.0, 1e-7);
}

TEST(Dispatch, NeverWorseThanBruteForceWithBindingComfort) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(10.0, 200.0);
  auto cfg = day_cfg(4);
  auto b = house(5.0, 3.0, 2.0);
  std::vector<double> t_out{0.0, 0.0, 0.0, 0.0};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> prices{u(rng), u(rng), u(rng), u(rng)};
    auto lp = dispatch(b, cfg, t_out, prices, 4.0);
    double brute = brute_force_cost(b, cfg, t_out, prices, 4.0);
    ASSERT_TRUE(std::isfinite(brute));
    EXPECT_LE(lp.cost_eur, brute + 1e-9);
  }
}

TEST(Dispatch, InvariantsOnRandomDays) {
  auto cfg = day_cfg();
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    std::mt19937_64 rng(seed);
    auto b = house(std::uniform_real_distribution<double>(4, 10)(rng), std::uniform_real_distribution<double>(4, 15)(rng), 5.0);
    auto t_out = winter_day(seed);
    auto prices = random_prices(seed);
    auto base = baseline_profile(b, cfg, t_out);
    auto r = dispatch(b, cfg, t_out, prices, base.energy_kwh);
    auto chk = check_schedule(b, cfg, t_out, r.schedule_kw, base.energy_kwh);
    EXPECT_TRUE(chk.ok()) << "seed " << seed;
    EXPECT_LE(std::abs(r.energy_kwh - base.energy_kwh), 1e-6 * std::max(1.0, base.energy_kwh));
    EXPECT_LE(r.cost_eur, schedule_cost(base.schedule_kw, prices, cfg.dt) + 1e-6);
    auto temps = simulate_temperature(b, cfg, t_out, r.schedule_kw);
    EXPECT_LT(max_abs_diff(temps, r.temperatures), 1e-6);
  }
}

TEST(Dispatch, BlendsOfFeasibleSchedulesStayFeasible) {
  auto cfg = day_cfg();
  auto b = house(6.0, 8.0, 5.0);
  auto t_out = winter_day(5);
  auto base = baseline_profile(b, cfg, t_out);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = dispatch(b, cfg, t_out, random_prices(100 + trial), base.energy_kwh).schedule_kw;
    auto y = dispatch(b, cfg, t_out, random_prices(200 + trial), base.energy_kwh).schedule_kw;
    double theta = std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<double> z(24);
    for (int t = 0; t < 24; ++t) z[t] = theta * x[t] + (1 - theta) * y[t];
    EXPECT_TRUE(check_schedule(b, cfg, t_out, z, base.energy_kwh).ok());
  }
}

TEST(Config, RejectsInvalid) {
  ComfortConfig cfg;
  cfg.t_min = 22.0;
  EXPECT_THROW(cfg.validate(), Error);
  auto b = house();
  b.r_th = 0.0;
  EXPECT_THROW(b.validate(), Error);
}
