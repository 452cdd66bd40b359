// flexbid: command-line front end for instance generation, allocation,
// bidding, clearing and campaign simulation.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "flexbid/io.hpp"
#include "flexbid/report.hpp"
#include "flexbid/simulate.hpp"
#include "flexbid/synthetic.hpp"

namespace {

using namespace flexbid;
namespace fs = std::filesystem;

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> scenarios;
  std::optional<int> max_bids;
  std::optional<std::string> mode;
  std::optional<std::string> pricing;
  std::optional<int> facets;
  std::string out;
  bool json_errors = false;
  bool quiet = false;
};

// Built-in defaults, then the config file, then command-line flags.
io::CampaignFile resolve_config(const GlobalFlags& g) {
  io::CampaignFile f;
  if (!g.config.empty()) f = io::read_campaign(g.config);
  CampaignConfig& c = f.config;
  if (g.seed) c.seed = *g.seed;
  if (g.scenarios) c.scenarios = *g.scenarios;
  if (g.max_bids) c.max_bids = *g.max_bids;
  if (g.mode) c.mode = parse_mode(*g.mode);
  if (g.pricing) c.pricing = io::parse_pricing(*g.pricing, c.pricing.price_cap_eur_mwh, c.pricing.voll_eur_mwh);
  if (g.facets) c.grid.facets = *g.facets;
  return f;
}

Instance load_for(const io::CampaignFile& f) { return io::load_instance(f.data_dir, f.config.comfort.horizon); }

fs::path out_dir(const GlobalFlags& g, const std::string& fallback) { return g.out.empty() ? fs::path(fallback) : fs::path(g.out); }

void emit(const fs::path& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    io::write_file(path, content);
  }
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& f : io::split_fields(s)) {
    try {
      out.push_back(std::stoi(f));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "not an integer list: '" + s + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& f : io::split_fields(s)) {
    try {
      out.push_back(std::stod(f));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "not a number list: '" + s + "'");
    }
  }
  return out;
}

void print_summary(const simulate::CampaignReport& rep) {
  std::cout << "days " << rep.days.size() << ", failures " << rep.failures.size() << "\n"
            << "tc_inf " << format_double(rep.tc_inf) << " EUR, tc_cleared " << format_double(rep.tc_cleared)
            << " EUR, tc_opt " << format_double(rep.tc_opt) << " EUR\n"
            << "eta (cost-weighted) " << format_double(rep.eta_weighted) << ", eta (daily mean) "
            << format_double(rep.eta_mean) << "\n"
            << "savings " << format_double(rep.savings_eur) << " EUR, per HP " << format_double(rep.savings_per_hp_eur)
            << " EUR\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Day-ahead block bidding for aggregated heat pumps"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalFlags g;
  app.add_option("--config", g.config, "campaign.json");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--scenarios", g.scenarios, "price scenarios per day");
  app.add_option("--max-bids", g.max_bids, "bids per exclusive group");
  app.add_option("--mode", g.mode, "unbundled or integrated")->check(CLI::IsMember({"unbundled", "integrated"}));
  app.add_option("--pricing", g.pricing, "truthful or mabp")->check(CLI::IsMember({"truthful", "mabp"}));
  app.add_option("--facets", g.facets, "polygon facets for loading limits");
  app.add_option("--out", g.out, "output directory or file");
  app.add_flag("--json-errors", g.json_errors, "report errors as JSON on stderr");
  app.add_flag("-q,--quiet", g.quiet, "suppress informational logging");

  // generate
  auto* gen = app.add_subcommand("generate", "write a synthetic instance bundle");
  synthetic::SyntheticSpec spec;
  std::string start;
  bool no_network = false;
  gen->add_option("--buildings", spec.buildings);
  gen->add_option("--hp-share", spec.hp_share_pct, "percent of buildings with a heat pump");
  gen->add_option("--days", spec.days);
  gen->add_option("--history-days", spec.history_days);
  gen->add_option("--start", start, "first campaign day (YYYY-MM-DD)");
  gen->add_option("--volatility", spec.volatility, "price volatility scale, 0 for flat prices");
  gen->add_option("--stress-margin", spec.stress_margin, "line rating relative to the design peak");
  gen->add_option("--depth", spec.depth);
  gen->add_option("--branching", spec.branching);
  gen->add_flag("--no-network", no_network);
  gen->add_flag("--write-forecast", spec.write_forecast, "store the persistence forecast column");

  // allocate
  auto* alloc = app.add_subcommand("allocate", "assign buildings to network nodes");
  std::string a_buildings, a_nodes, a_edges, a_output;
  std::optional<double> a_share;
  alloc->add_option("--buildings", a_buildings)->required();
  alloc->add_option("--nodes", a_nodes)->required();
  alloc->add_option("--edges", a_edges)->required();
  alloc->add_option("-o,--output", a_output, "alloc.json (default: stdout)");
  alloc->add_option("--hp-share", a_share, "override has_hp with a seeded share");

  // bid
  auto* bid = app.add_subcommand("bid", "build the exclusive group for one day");
  std::string b_date, b_output;
  bid->add_option("--date", b_date)->required();
  bid->add_option("-o,--output", b_output, "bids.json (default: stdout)");

  // clear
  auto* clr = app.add_subcommand("clear", "clear an exclusive group at realized prices");
  std::string c_bids, c_prices, c_date, c_output;
  clr->add_option("--bids", c_bids)->required();
  clr->add_option("--prices", c_prices)->required();
  clr->add_option("--date", c_date, "defaults to the day in bids.json");
  clr->add_option("-o,--output", c_output, "outcome.json (default: stdout)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "run a campaign and write the report");

  // report
  auto* rep = app.add_subcommand("report", "write the sweep tables");
  std::string r_bids = "1,2,4,8,12,16,20,24", r_shares = "15,30,45,60";
  bool r_skip_runtime = false;
  rep->add_option("--bids-list", r_bids, "comma-separated B values");
  rep->add_option("--shares", r_shares, "comma-separated HP shares in percent");
  rep->add_flag("--skip-runtime", r_skip_runtime, "omit the runtime-vs-bids campaigns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  log::threshold() = g.quiet ? log::Level::Warn : log::Level::Info;

  try {
    if (*gen) {
      if (!start.empty()) spec.start = Date::parse(start);
      if (g.seed) spec.seed = *g.seed;
      spec.network = !no_network;
      auto [inst, cfg] = synthetic::generate_synthetic(spec);
      io::CampaignFile f = resolve_config(g);
      CampaignConfig c = f.config;
      c.start = cfg.start;
      c.end = cfg.end;
      c.seed = spec.seed;
      c.s_base_kva = cfg.s_base_kva;
      c.v_base_kv = cfg.v_base_kv;
      if (no_network) c.mode = UtilityMode::Unbundled;
      fs::path dir = out_dir(g, "instance");
      io::write_instance(dir, inst);
      io::write_file(dir / "campaign.json", io::dump_json(io::campaign_to_json(c)));
      log::info("wrote instance to " + dir.string());
    } else if (*alloc) {
      std::vector<thermal::BuildingParams> buildings = io::read_buildings(a_buildings);
      grid::RadialNetwork net = io::read_network(a_nodes, a_edges);
      CampaignConfig c = resolve_config(g).config;
      if (a_share) c.hp_share_pct = *a_share;
      buildings = select_hp_buildings(buildings, c);
      grid::AllocationResult a = grid::allocate_buildings(buildings, net, c.solver);
      emit(a_output, io::dump_json(io::allocation_to_json(a)));
    } else if (*bid) {
      io::CampaignFile f = resolve_config(g);
      Instance inst = load_for(f);
      Date d = Date::parse(b_date);
      simulate::Prepared p = simulate::prepare(f.config, inst);
      simulate::DayContext ctx =
          simulate::make_day_context(f.config, inst, d, p.buildings, p.allocation ? &*p.allocation : nullptr);
      simulate::DayBid db = simulate::bid_day(f.config, inst, ctx);
      if (!db.eg) fail(ErrorCode::EmptyInput, d.iso() + ": no flexible buildings to bid");
      io::BidFile bf{d, db.eg->group, f.config.pricing.name()};
      emit(b_output.empty() ? g.out : b_output, io::dump_json(io::bids_to_json(bf)));
    } else if (*clr) {
      io::BidFile bf = io::bids_from_json(io::read_json(c_bids), c_bids);
      Date d = c_date.empty() ? bf.day : Date::parse(c_date);
      scenarios::PriceSeries prices = io::read_prices(c_prices);
      CampaignConfig c = resolve_config(g).config;
      clearing::ClearingOutcome o = clearing::clear(bf.group, prices.at(d).realized, c.comfort.dt);
      emit(c_output.empty() ? g.out : c_output, io::dump_json(io::outcome_to_json(o)));
    } else if (*sim) {
      io::CampaignFile f = resolve_config(g);
      Instance inst = load_for(f);
      simulate::CampaignReport r = simulate::run_campaign(f.config, inst);
      fs::path dir = out_dir(g, "results");
      io::write_campaign_outputs(dir, r, f.config);
      print_summary(r);
      if (!r.failures.empty()) {
        for (const auto& fl : r.failures) std::cerr << fl.day.iso() << ": " << fl.message << "\n";
        return 3;
      }
    } else if (*rep) {
      io::CampaignFile f = resolve_config(g);
      Instance inst = load_for(f);
      fs::path dir = out_dir(g, "report");
      std::vector<int> bids = parse_int_list(r_bids);
      std::vector<double> shares = parse_double_list(r_shares);

      simulate::CampaignReport base = simulate::run_campaign(f.config, inst);
      io::write_campaign_outputs(dir, base, f.config);
      io::write_file(dir / "savings_vs_volatility.csv", report::format_savings_vs_volatility(base));
      io::write_file(dir / "efficiency_vs_bids.csv", report::format_bids(report::efficiency_vs_bids(f.config, inst, bids)));
      if (!r_skip_runtime)
        io::write_file(dir / "runtime_vs_bids.csv", report::format_bids(report::runtime_vs_bids(f.config, inst, bids)));
      auto share_rows = report::sweep_shares(f.config, inst, shares);
      io::write_file(dir / "efficiency_vs_share.csv", report::format_shares(share_rows));
      io::write_file(dir / "runtime_vs_share.csv", report::format_runtime_vs_share(share_rows));
      print_summary(base);
    }
  } catch (const Error& e) {
    if (g.json_errors) {
      nlohmann::json j = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
      std::cerr << j.dump() << "\n";
    } else {
      std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    }
    return 2;
  } catch (const std::exception& e) {
    if (g.json_errors) {
      nlohmann::json j = {{"error", "Internal"}, {"message", e.what()}};
      std::cerr << j.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 2;
  }
  return 0;
}
