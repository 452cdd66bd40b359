#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "flexbid/io.hpp"
#include "flexbid/simulate.hpp"

using namespace flexbid;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("flexbid_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string hourly(const std::string& date, const std::string& value, int skip = -1) {
  std::string s;
  for (int h = 0; h < 24; ++h)
    if (h != skip) s += date + "," + std::to_string(h) + "," + value + "\n";
  return s;
}

fs::path minimal_bundle(const std::string& name) {
  fs::path dir = scratch(name);
  io::write_file(dir / "buildings.csv", io::buildings_header + "\nb1,0,0,6,10,5,0,1\n");
  io::write_file(dir / "weather.csv", io::weather_header + "\n" + hourly("2024-10-01", "4") + hourly("2024-10-02", "3"));
  io::write_file(dir / "prices.csv", io::prices_header + "\n" + hourly("2024-10-01", "100") + hourly("2024-10-02", "120"));
  return dir;
}

ErrorCode code_of(const std::function<void()>& f, std::string* msg = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (msg) *msg = e.what();
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::IoError;
}

std::vector<thermal::BuildingParams> buildings_csv(const std::string& body) {
  return io::parse_buildings(io::parse_csv(io::buildings_header + "\n" + body, "b.csv", {io::buildings_header}));
}

std::string read_all(const fs::path& p) { return io::read_file(p); }

}  // namespace

TEST(Bundle, MinimalLoadsAndFillsForecast) {
  auto dir = minimal_bundle("minimal");
  Instance inst = io::load_instance(dir);
  ASSERT_EQ(inst.buildings.size(), 1u);
  EXPECT_TRUE(inst.buildings[0].has_hp);
  EXPECT_DOUBLE_EQ(inst.buildings[0].p_hp_rated, 5.0);
  EXPECT_EQ(inst.weather.size(), 2u);
  EXPECT_FALSE(inst.network.has_value());
  Date d1{2024, 10, 1}, d2{2024, 10, 2};
  EXPECT_FALSE(inst.prices.at(d1).forecast.has_value());
  ASSERT_TRUE(inst.prices.at(d2).forecast.has_value());
  EXPECT_DOUBLE_EQ((*inst.prices.at(d2).forecast)[5], 100.0);

  CampaignConfig cfg;
  cfg.start = cfg.end = d2;
  cfg.scenarios = 1;
  auto rep = simulate::run_campaign(cfg, inst);
  EXPECT_TRUE(rep.failures.empty());
  ASSERT_EQ(rep.days.size(), 1u);
  // Flat realized prices on the day: nothing to gain.
  EXPECT_TRUE(std::isnan(rep.days[0].eta));
}

TEST(Bundle, MissingHourNamesTheDate) {
  auto dir = minimal_bundle("missing_hour");
  io::write_file(dir / "weather.csv", io::weather_header + "\n" + hourly("2024-10-01", "4") + hourly("2024-10-02", "3", 13));
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_instance(dir); }, &msg), ErrorCode::GridMismatch);
  EXPECT_NE(msg.find("2024-10-02"), std::string::npos) << msg;
  EXPECT_NE(msg.find("13"), std::string::npos) << msg;
}

TEST(Bundle, DuplicateHourIsRejected) {
  auto dir = minimal_bundle("dup_hour");
  io::write_file(dir / "weather.csv", io::weather_header + "\n" + hourly("2024-10-01", "4") + hourly("2024-10-02", "3") +
                                          "2024-10-02,5,3\n");
  EXPECT_EQ(code_of([&] { io::load_instance(dir); }), ErrorCode::GridMismatch);
}

TEST(Bundle, DaySetsMustAgree) {
  auto dir = minimal_bundle("days");
  io::write_file(dir / "prices.csv", io::prices_header + "\n" + hourly("2024-10-01", "100"));
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_instance(dir); }, &msg), ErrorCode::GridMismatch);
  EXPECT_NE(msg.find("2024-10-02"), std::string::npos) << msg;
}

TEST(Csv, WrongHeaderIsSchemaError) {
  std::string msg;
  EXPECT_EQ(code_of([&] { io::parse_csv("id,x\n", "f.csv", {io::buildings_header}); }, &msg), ErrorCode::SchemaError);
  EXPECT_NE(msg.find("f.csv:1:1"), std::string::npos) << msg;
}

TEST(Csv, BadNumberReportsLineAndColumn) {
  std::string msg;
  auto parse = [&] { buildings_csv("b1,0,0,6,10,5,0,1\nb2,0,0,abc,10,5,0,1\n"); };
  EXPECT_EQ(code_of(parse, &msg), ErrorCode::SchemaError);
  EXPECT_NE(msg.find("b.csv:3:8"), std::string::npos) << msg;
  EXPECT_NE(msg.find("r_th_K_per_kW"), std::string::npos) << msg;
}

TEST(Csv, FieldCountAndBooleans) {
  EXPECT_EQ(code_of([&] { buildings_csv("b1,0,0,6,10,5,0\n"); }),
            ErrorCode::SchemaError);
  EXPECT_EQ(code_of([&] { buildings_csv("b1,0,0,6,10,5,0,yes\n"); }),
            ErrorCode::SchemaError);
  EXPECT_EQ(code_of([&] { buildings_csv("b1,0,0,6,10,5,0,1\nb1,0,0,6,10,5,0,1\n"); }),
            ErrorCode::SchemaError);
}

TEST(Csv, PartialForecastIsRejected) {
  auto dir = scratch("partial_fc");
  std::string s = io::prices_header_fc + "\n";
  for (int h = 0; h < 24; ++h) s += "2024-10-01," + std::to_string(h) + ",100," + (h < 12 ? "90" : "") + "\n";
  io::write_file(dir / "p.csv", s);
  EXPECT_EQ(code_of([&] { io::read_prices(dir / "p.csv"); }), ErrorCode::SchemaError);
}

TEST(Allocation, UnknownNodeIsDangling) {
  auto [inst, cfg] = fixtures::small_case(fixtures::small_spec(3, 1, 1));
  auto dir = scratch("alloc");
  io::write_instance(dir, inst);
  nlohmann::json j = {{"total_distance_m", 0.0},
                      {"assignments", {{{"building_id", "b1"}, {"node_id", "nowhere"}},
                                       {{"building_id", "b2"}, {"node_id", "n0"}},
                                       {{"building_id", "b3"}, {"node_id", "n0"}}}}};
  io::write_file(dir / "alloc.json", io::dump_json(j));
  std::string msg;
  EXPECT_EQ(code_of([&] { io::load_instance(dir); }, &msg), ErrorCode::DanglingReference);
  EXPECT_NE(msg.find("nowhere"), std::string::npos) << msg;

  j["assignments"][0]["node_id"] = "n0";
  j["assignments"].erase(2);
  io::write_file(dir / "alloc.json", io::dump_json(j));
  EXPECT_EQ(code_of([&] { io::load_instance(dir); }), ErrorCode::DanglingReference);
}

TEST(Allocation, JsonRoundTrip) {
  auto [inst, cfg] = fixtures::small_case(fixtures::small_spec(5, 1, 1));
  auto a = grid::allocate_buildings(inst.buildings, *inst.network);
  auto dir = scratch("alloc_rt");
  inst.allocation = a;
  io::write_instance(dir, inst);
  Instance back = io::load_instance(dir);
  ASSERT_TRUE(back.allocation.has_value());
  EXPECT_EQ(back.allocation->node_of, a.node_of);
  EXPECT_DOUBLE_EQ(back.allocation->total_distance_m, a.total_distance_m);
}

TEST(Network, SubstationWithoutRatingIsRejected) {
  auto dir = scratch("net");
  io::write_file(dir / "nodes.csv", io::nodes_header + "\nn0,,0,0,10,1,,1\nn1,n0,10,0,10,0,,\n");
  io::write_file(dir / "edges.csv", io::edges_header + "\nn1,n0,0.01,0.01,1\n");
  EXPECT_EQ(code_of([&] { io::read_network(dir / "nodes.csv", dir / "edges.csv"); }), ErrorCode::SchemaError);
  io::write_file(dir / "nodes.csv", io::nodes_header + "\nn0,,0,0,10,1,500,1\nn1,n0,10,0,10,0,,\n");
  auto net = io::read_network(dir / "nodes.csv", dir / "edges.csv");
  EXPECT_EQ(net.nodes.size(), 2u);
  io::write_file(dir / "edges.csv", io::edges_header + "\nn1,n0,0.01,0.01,1\nn0,n1,0.01,0.01,1\n");
  EXPECT_THROW(io::read_network(dir / "nodes.csv", dir / "edges.csv"), Error);
}

TEST(Generate, ByteIdenticalRoundTrip) {
  auto spec = fixtures::small_spec(10, 4, 5, 17);
  spec.write_forecast = true;
  auto [inst, cfg] = synthetic::generate_synthetic(spec);
  auto a = scratch("rt_a"), b = scratch("rt_b");
  io::write_instance(a, inst);
  Instance back = io::read_instance(io::BundlePaths::in(a));
  io::write_instance(b, back);
  for (const char* f : {"buildings.csv", "weather.csv", "prices.csv", "nodes.csv", "edges.csv", "profiles.csv"})
    EXPECT_EQ(read_all(a / f), read_all(b / f)) << f;
}

TEST(Generate, SameSeedSameBundle) {
  auto spec = fixtures::small_spec(10, 3, 3, 5);
  auto a = scratch("seed_a"), b = scratch("seed_b"), c = scratch("seed_c");
  io::write_instance(a, synthetic::generate_synthetic(spec).first);
  io::write_instance(b, synthetic::generate_synthetic(spec).first);
  spec.seed = 6;
  io::write_instance(c, synthetic::generate_synthetic(spec).first);
  for (const char* f : {"buildings.csv", "weather.csv", "prices.csv", "nodes.csv", "edges.csv", "profiles.csv"})
    EXPECT_EQ(read_all(a / f), read_all(b / f)) << f;
  EXPECT_NE(read_all(a / "prices.csv"), read_all(c / "prices.csv"));
}

TEST(Generate, HpSharesNest) {
  auto spec = fixtures::small_spec(40, 1, 1, 8);
  auto low = spec, high = spec;
  low.hp_share_pct = 15;
  high.hp_share_pct = 30;
  auto a = synthetic::generate_synthetic(low).first.buildings;
  auto b = synthetic::generate_synthetic(high).first.buildings;
  int na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i].has_hp;
    nb += b[i].has_hp;
    if (a[i].has_hp) {
      EXPECT_TRUE(b[i].has_hp) << a[i].id;
    }
  }
  EXPECT_EQ(na, 6);
  EXPECT_EQ(nb, 12);
}

TEST(Generate, FlatPricesLeaveEfficiencyUndefined) {
  auto spec = fixtures::small_spec(6, 3, 4, 2);
  spec.volatility = 0.0;
  auto dir = scratch("flat");
  CampaignConfig cfg0;
  {
    auto [inst, cfg] = synthetic::generate_synthetic(spec);
    io::write_instance(dir, inst);
    cfg0 = cfg;
  }
  Instance inst = io::load_instance(dir);
  cfg0.scenarios = 4;
  auto rep = simulate::run_campaign(cfg0, inst);
  ASSERT_TRUE(rep.failures.empty());
  for (const auto& d : rep.days) EXPECT_TRUE(std::isnan(d.eta)) << d.day.iso() << " eta " << d.eta;
}

TEST(Json, BidsRoundTrip) {
  io::BidFile f;
  f.day = Date{2024, 10, 3};
  f.group.max_bids = 4;
  f.group.bids = {{{0.1, 0.25, 0.0}, 12.5}, {{0.2, 0.05, 0.1}, 12.5}};
  io::BidFile back = io::bids_from_json(io::parse_json(io::dump_json(io::bids_to_json(f)), "b.json"), "b.json");
  EXPECT_EQ(back.day, f.day);
  EXPECT_EQ(back.group.max_bids, 4);
  ASSERT_EQ(back.group.bids.size(), 2u);
  EXPECT_EQ(back.group.bids[1].profile_mw, f.group.bids[1].profile_mw);
  EXPECT_EQ(back.group.bids[0].price_eur, 12.5);

  f.group.max_bids = 1;
  EXPECT_EQ(code_of([&] { io::bids_from_json(io::bids_to_json(f), "b.json"); }), ErrorCode::TooManyBids);
  auto j = io::bids_to_json(f);
  j["extra"] = 1;
  EXPECT_EQ(code_of([&] { io::bids_from_json(j, "b.json"); }), ErrorCode::SchemaError);
}

TEST(Json, OutcomeRoundTrip) {
  clearing::ClearingOutcome o;
  o.alpha = {0.0, 1.0};
  o.accepted_profile_mw = {0.3, 0.1};
  o.payment_eur = 21.5;
  o.surplus_eur = 3.25;
  auto back = io::outcome_from_json(io::outcome_to_json(o), "o.json");
  EXPECT_EQ(back.alpha, o.alpha);
  EXPECT_EQ(back.accepted_profile_mw, o.accepted_profile_mw);
  EXPECT_EQ(back.payment_eur, o.payment_eur);
  EXPECT_EQ(back.surplus_eur, o.surplus_eur);
}

TEST(Campaign, JsonRoundTripAndUnknownKeys) {
  CampaignConfig c;
  c.scenarios = 7;
  c.mode = UtilityMode::Integrated;
  c.pricing = bidding::PricingMode::truthful(9000);
  c.hp_share_pct = 45;
  c.grid.facets = 12;
  auto dir = scratch("campaign");
  io::write_file(dir / "campaign.json", io::dump_json(io::campaign_to_json(c, "data")));
  auto f = io::read_campaign(dir / "campaign.json");
  EXPECT_EQ(f.config.scenarios, 7);
  EXPECT_EQ(f.config.mode, UtilityMode::Integrated);
  EXPECT_EQ(f.config.pricing.name(), "truthful");
  EXPECT_EQ(f.config.pricing.voll_eur_mwh, 9000);
  EXPECT_EQ(f.config.hp_share_pct, 45.0);
  EXPECT_EQ(f.config.grid.facets, 12);
  EXPECT_EQ(f.data_dir, dir / "data");

  io::write_file(dir / "bad.json", "{\"scenarios\": 3, \"senarios\": 4}");
  std::string msg;
  EXPECT_EQ(code_of([&] { io::read_campaign(dir / "bad.json"); }, &msg), ErrorCode::SchemaError);
  EXPECT_NE(msg.find("senarios"), std::string::npos);
}

TEST(Report, OutputsWritten) {
  auto [inst, cfg] = fixtures::small_case(fixtures::small_spec(4, 2, 3));
  cfg.scenarios = 2;
  auto rep = simulate::run_campaign(cfg, inst);
  auto dir = scratch("outputs");
  io::write_campaign_outputs(dir, rep, cfg);
  std::string report = read_all(dir / "report.csv");
  EXPECT_EQ(report.substr(0, report.find('\n')), io::report_header);
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 3);
  auto summary = io::read_json(dir / "summary.json");
  EXPECT_NEAR(summary["tc_inf_eur"].get<double>(), rep.tc_inf, 1e-9);
  EXPECT_TRUE(fs::exists(dir / "schedules" / (cfg.start.iso() + ".csv")));
}
