#pragma once

// File formats: fixed-header CSV for tabular data, JSON for bids, outcomes,
// allocations and campaign configuration. Readers are strict; every schema
// problem is reported as file:line:column.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexbid/bidding.hpp"
#include "flexbid/clearing.hpp"
#include "flexbid/common.hpp"
#include "flexbid/grid.hpp"
#include "flexbid/instance.hpp"
#include "flexbid/scenarios.hpp"
#include "flexbid/simulate.hpp"
#include "flexbid/thermal.hpp"

namespace flexbid::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline const std::string buildings_header = "id,x_m,y_m,r_th_K_per_kW,c_th_kWh_per_K,p_hp_rated_kW,p_pv_rated_kW,has_hp";
inline const std::string weather_header = "date,hour,t_out_C";
inline const std::string prices_header = "date,hour,realized_eur_mwh";
inline const std::string prices_header_fc = "date,hour,realized_eur_mwh,forecast_eur_mwh";
inline const std::string nodes_header = "id,ancestor_id,x_m,y_m,p_cap_kW,is_substation,s_rating_kVA,v_nom_pu";
inline const std::string edges_header = "from_id,to_id,r_pu,x_pu,s_rating_pu";
inline const std::string profiles_header = "date,hour,slf,cf";
inline const std::string report_header =
    "date,tc_inf_eur,tc_cleared_eur,tc_opt_eur,eta,shed_kwh,price_std_eur_mwh,runtime_dispatch_s,runtime_clearing_s";

// --- Files -------------------------------------------------------------------

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

// --- CSV ---------------------------------------------------------------------

struct CsvCell {
  std::string text;
  int column = 1;  // 1-based character column
};

struct CsvRow {
  int line = 0;
  std::vector<CsvCell> cells;
};

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  [[noreturn]] void error(const CsvRow& row, std::size_t field, const std::string& msg) const {
    int col = field < row.cells.size() ? row.cells[field].column : 1;
    fail(ErrorCode::SchemaError, file + ":" + std::to_string(row.line) + ":" + std::to_string(col) + ": " +
                                     header.at(field) + ": " + msg);
  }

  const std::string& text(const CsvRow& row, std::size_t field) const { return row.cells[field].text; }

  double number(const CsvRow& row, std::size_t field) const {
    const std::string& s = text(row, field);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) error(row, field, "expected a number, got '" + s + "'");
    if (!std::isfinite(v)) error(row, field, "value must be finite");
    return v;
  }

  std::optional<double> optional_number(const CsvRow& row, std::size_t field) const {
    if (text(row, field).empty()) return std::nullopt;
    return number(row, field);
  }

  int integer(const CsvRow& row, std::size_t field) const {
    const std::string& s = text(row, field);
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) error(row, field, "expected an integer, got '" + s + "'");
    return v;
  }

  bool boolean(const CsvRow& row, std::size_t field) const {
    const std::string& s = text(row, field);
    if (s == "1" || s == "true") return true;
    if (s == "0" || s == "false") return false;
    error(row, field, "expected 0/1/true/false, got '" + s + "'");
  }

  Date date(const CsvRow& row, std::size_t field) const {
    try {
      return Date::parse(text(row, field));
    } catch (const Error& e) {
      error(row, field, e.what());
    }
  }

  std::string id(const CsvRow& row, std::size_t field) const {
    const std::string& s = text(row, field);
    if (s.empty()) error(row, field, "id must not be empty");
    return s;
  }
};

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Splits CSV text; the header must equal one of `headers`. Quoting is not
/// supported: ids and numbers never contain commas.
inline CsvTable parse_csv(const std::string& content, const std::string& file,
                          const std::vector<std::string>& headers) {
  CsvTable table;
  table.file = file;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header) {
      bool ok = false;
      for (const auto& h : headers) ok = ok || line == h;
      if (!ok) {
        std::string expected = headers.front();
        for (std::size_t i = 1; i < headers.size(); ++i) expected += "' or '" + headers[i];
        fail(ErrorCode::SchemaError, file + ":1:1: header must be '" + expected + "', got '" + line + "'");
      }
      table.header = split_fields(line);
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos)
      fail(ErrorCode::SchemaError, file + ":" + std::to_string(lineno) + ":" +
                                       std::to_string(line.find('"') + 1) + ": quoted fields are not supported");
    CsvRow row;
    row.line = lineno;
    int col = 1;
    for (auto& f : split_fields(line)) {
      int width = static_cast<int>(f.size());
      row.cells.push_back({std::move(f), col});
      col += width + 1;
    }
    if (row.cells.size() != table.header.size())
      fail(ErrorCode::SchemaError, file + ":" + std::to_string(lineno) + ":1: expected " +
                                       std::to_string(table.header.size()) + " fields, got " +
                                       std::to_string(row.cells.size()));
    table.rows.push_back(std::move(row));
  }
  if (!have_header) fail(ErrorCode::SchemaError, file + ":1:1: file is empty");
  return table;
}

inline CsvTable read_csv(const fs::path& path, const std::vector<std::string>& headers) {
  return parse_csv(read_file(path), path.string(), headers);
}

inline std::string bool_field(bool b) { return b ? "1" : "0"; }

// --- Hourly series -----------------------------------------------------------

/// Collects (date, hour) -> value rows and checks that every day carries
/// hours 0..horizon-1 exactly once.
template <class Value>
class HourlyGrid {
 public:
  HourlyGrid(const CsvTable& table, int horizon) : table_(table), horizon_(horizon) {}

  void put(const CsvRow& row, Date d, int hour, Value v) {
    // Off-grid hours are a time-axis problem (e.g. a 25-hour DST day), not a
    // malformed cell.
    auto where = [&] { return table_.file + ":" + std::to_string(row.line) + ":" + std::to_string(row.cells[1].column) + ": "; };
    if (hour < 0 || hour >= horizon_)
      fail(ErrorCode::GridMismatch, where() + d.iso() + " has hour " + std::to_string(hour) + ", expected 0.." +
                                        std::to_string(horizon_ - 1) + " (daylight-saving days are not supported)");
    auto& day = days_[d];
    if (day.empty()) day.resize(horizon_);
    if (day[hour]) fail(ErrorCode::GridMismatch, where() + "duplicate hour " + std::to_string(hour) + " on " + d.iso());
    day[hour] = std::move(v);
  }

  std::map<Date, std::vector<Value>> finish() const {
    std::map<Date, std::vector<Value>> out;
    for (const auto& [d, hours] : days_) {
      std::vector<Value> values;
      for (int h = 0; h < horizon_; ++h) {
        if (!hours[h])
          fail(ErrorCode::GridMismatch, table_.file + ": " + d.iso() + " is missing hour " + std::to_string(h) +
                                            " (days must carry " + std::to_string(horizon_) +
                                            " hours; daylight-saving days are not supported)");
        values.push_back(*hours[h]);
      }
      out.emplace(d, std::move(values));
    }
    return out;
  }

 private:
  const CsvTable& table_;
  int horizon_;
  std::map<Date, std::vector<std::optional<Value>>> days_;
};

// --- Buildings ---------------------------------------------------------------

inline std::vector<thermal::BuildingParams> parse_buildings(const CsvTable& t) {
  std::vector<thermal::BuildingParams> out;
  std::set<std::string> seen;
  for (const auto& row : t.rows) {
    thermal::BuildingParams b;
    b.id = t.id(row, 0);
    if (!seen.insert(b.id).second) t.error(row, 0, "duplicate building id '" + b.id + "'");
    b.position = {t.number(row, 1), t.number(row, 2)};
    b.r_th = t.number(row, 3);
    b.c_th = t.number(row, 4);
    b.p_hp_rated = t.number(row, 5);
    b.p_pv_rated = t.number(row, 6);
    b.has_hp = t.boolean(row, 7);
    if (!(b.r_th > 0.0)) t.error(row, 3, "must be positive");
    if (!(b.c_th > 0.0)) t.error(row, 4, "must be positive");
    if (b.p_hp_rated < 0.0) t.error(row, 5, "must be non-negative");
    if (b.p_pv_rated < 0.0) t.error(row, 6, "must be non-negative");
    out.push_back(std::move(b));
  }
  return out;
}

inline std::vector<thermal::BuildingParams> read_buildings(const fs::path& path) {
  return parse_buildings(read_csv(path, {buildings_header}));
}

inline std::string format_buildings(const std::vector<thermal::BuildingParams>& buildings) {
  std::string s = buildings_header + "\n";
  for (const auto& b : buildings) {
    s += b.id + "," + format_double(b.position.x) + "," + format_double(b.position.y) + "," +
         format_double(b.r_th) + "," + format_double(b.c_th) + "," + format_double(b.p_hp_rated) + "," +
         format_double(b.p_pv_rated) + "," + bool_field(b.has_hp) + "\n";
  }
  return s;
}

// --- Weather -----------------------------------------------------------------

using Weather = std::map<Date, std::vector<double>>;

inline Weather read_weather(const fs::path& path, int horizon = 24) {
  CsvTable t = read_csv(path, {weather_header});
  HourlyGrid<double> grid(t, horizon);
  for (const auto& row : t.rows) grid.put(row, t.date(row, 0), t.integer(row, 1), t.number(row, 2));
  return grid.finish();
}

inline std::string format_weather(const Weather& w) {
  std::string s = weather_header + "\n";
  for (const auto& [d, temps] : w)
    for (std::size_t h = 0; h < temps.size(); ++h)
      s += d.iso() + "," + std::to_string(h) + "," + format_double(temps[h]) + "\n";
  return s;
}

// --- Prices ------------------------------------------------------------------

/// A day's forecast cells must be all present or all empty.
inline scenarios::PriceSeries read_prices(const fs::path& path, int horizon = 24) {
  CsvTable t = read_csv(path, {prices_header, prices_header_fc});
  const bool has_fc = t.header.size() == 4;
  struct Cell {
    double realized;
    std::optional<double> forecast;
    int line;
  };
  HourlyGrid<Cell> grid(t, horizon);
  for (const auto& row : t.rows) {
    Cell c{t.number(row, 2), has_fc ? t.optional_number(row, 3) : std::nullopt, row.line};
    grid.put(row, t.date(row, 0), t.integer(row, 1), c);
  }
  scenarios::PriceSeries series;
  for (const auto& [d, cells] : grid.finish()) {
    scenarios::DayPrices day;
    std::size_t with_fc = 0;
    for (const auto& c : cells) {
      day.realized.push_back(c.realized);
      with_fc += c.forecast ? 1 : 0;
    }
    if (with_fc == cells.size()) {
      day.forecast.emplace();
      for (const auto& c : cells) day.forecast->push_back(*c.forecast);
    } else if (with_fc != 0) {
      for (const auto& c : cells)
        if (!c.forecast)
          fail(ErrorCode::SchemaError, t.file + ":" + std::to_string(c.line) + ":1: forecast_eur_mwh: " + d.iso() +
                                           " has forecasts for some hours only");
    }
    series.days.emplace(d, std::move(day));
  }
  return series;
}

inline std::string format_prices(const scenarios::PriceSeries& p) {
  bool any_fc = false;
  for (const auto& [d, day] : p.days) any_fc = any_fc || day.forecast.has_value();
  std::string s = (any_fc ? prices_header_fc : prices_header) + "\n";
  for (const auto& [d, day] : p.days) {
    for (std::size_t h = 0; h < day.realized.size(); ++h) {
      s += d.iso() + "," + std::to_string(h) + "," + format_double(day.realized[h]);
      if (any_fc) s += "," + (day.forecast ? format_double((*day.forecast)[h]) : std::string());
      s += "\n";
    }
  }
  return s;
}

// --- Network -----------------------------------------------------------------

inline grid::RadialNetwork read_network(const fs::path& nodes_path, const fs::path& edges_path) {
  grid::RadialNetwork net;
  CsvTable nt = read_csv(nodes_path, {nodes_header});
  for (const auto& row : nt.rows) {
    grid::Node n;
    n.id = nt.id(row, 0);
    if (!nt.text(row, 1).empty()) n.ancestor = nt.text(row, 1);
    n.position = {nt.number(row, 2), nt.number(row, 3)};
    n.p_cap_kw = nt.number(row, 4);
    n.is_substation = nt.boolean(row, 5);
    n.s_rating_kva = nt.optional_number(row, 6).value_or(0.0);
    n.v_nom_pu = nt.optional_number(row, 7).value_or(1.0);
    if (n.p_cap_kw < 0.0) nt.error(row, 4, "must be non-negative");
    if (n.is_substation && !(n.s_rating_kva > 0.0)) nt.error(row, 6, "substation rating must be positive");
    if (!(n.v_nom_pu > 0.0)) nt.error(row, 7, "must be positive");
    net.nodes.push_back(std::move(n));
  }
  CsvTable et = read_csv(edges_path, {edges_header});
  for (const auto& row : et.rows) {
    grid::Line l;
    l.from = et.id(row, 0);
    l.to = et.id(row, 1);
    l.r_pu = et.number(row, 2);
    l.x_pu = et.number(row, 3);
    l.s_rating_pu = et.number(row, 4);
    if (l.r_pu < 0.0) et.error(row, 2, "must be non-negative");
    if (l.x_pu < 0.0) et.error(row, 3, "must be non-negative");
    if (!(l.s_rating_pu > 0.0)) et.error(row, 4, "must be positive");
    net.lines.push_back(std::move(l));
  }
  grid::validate_radial(net);
  return net;
}

inline std::string format_nodes(const grid::RadialNetwork& net) {
  std::string s = nodes_header + "\n";
  for (const auto& n : net.nodes) {
    s += n.id + "," + n.ancestor.value_or("") + "," + format_double(n.position.x) + "," +
         format_double(n.position.y) + "," + format_double(n.p_cap_kw) + "," + bool_field(n.is_substation) + "," +
         (n.is_substation ? format_double(n.s_rating_kva) : std::string()) + "," +
         (n.is_substation ? format_double(n.v_nom_pu) : std::string()) + "\n";
  }
  return s;
}

inline std::string format_edges(const grid::RadialNetwork& net) {
  std::string s = edges_header + "\n";
  for (const auto& l : net.lines)
    s += l.from + "," + l.to + "," + format_double(l.r_pu) + "," + format_double(l.x_pu) + "," +
         format_double(l.s_rating_pu) + "\n";
  return s;
}

// --- Load and PV profiles ----------------------------------------------------

using Profiles = std::map<Date, grid::GridTimeSeries>;

inline Profiles read_profiles(const fs::path& path, int horizon = 24) {
  CsvTable t = read_csv(path, {profiles_header});
  HourlyGrid<std::pair<double, double>> grid(t, horizon);
  for (const auto& row : t.rows) {
    double slf = t.number(row, 2), cf = t.number(row, 3);
    if (slf < 0.0 || slf > 1.0) t.error(row, 2, "must lie in [0, 1]");
    if (cf < 0.0 || cf > 1.0) t.error(row, 3, "must lie in [0, 1]");
    grid.put(row, t.date(row, 0), t.integer(row, 1), {slf, cf});
  }
  Profiles out;
  for (const auto& [d, cells] : grid.finish()) {
    grid::GridTimeSeries s;
    for (const auto& [slf, cf] : cells) {
      s.slf.push_back(slf);
      s.cf.push_back(cf);
    }
    out.emplace(d, std::move(s));
  }
  return out;
}

inline std::string format_profiles(const Profiles& p) {
  std::string s = profiles_header + "\n";
  for (const auto& [d, series] : p)
    for (std::size_t h = 0; h < series.slf.size(); ++h)
      s += d.iso() + "," + std::to_string(h) + "," + format_double(series.slf[h]) + "," + format_double(series.cf[h]) + "\n";
  return s;
}

// --- JSON helpers ------------------------------------------------------------

inline json parse_json(const std::string& content, const std::string& file) {
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaError, file + ": " + e.what());
  }
}

inline json read_json(const fs::path& path) { return parse_json(read_file(path), path.string()); }

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// Typed access with the offending key named in errors.
template <class T>
T get_field(const json& obj, const std::string& key, const std::string& file) {
  if (!obj.contains(key)) fail(ErrorCode::SchemaError, file + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, file + ": key '" + key + "': " + e.what());
  }
}

inline void require_object(const json& j, const std::string& file, const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(ErrorCode::SchemaError, file + ": expected a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) fail(ErrorCode::SchemaError, file + ": unknown key '" + k + "'");
}

// --- Allocation --------------------------------------------------------------

inline json allocation_to_json(const grid::AllocationResult& a) {
  json assignments = json::array();
  for (const auto& [b, n] : a.node_of) assignments.push_back({{"building_id", b}, {"node_id", n}});
  return {{"total_distance_m", a.total_distance_m}, {"assignments", assignments}};
}

/// Reads alloc.json and checks every id against the building list and network.
inline grid::AllocationResult read_allocation(const fs::path& path,
                                              const std::vector<thermal::BuildingParams>& buildings,
                                              const grid::RadialNetwork& net) {
  const std::string file = path.string();
  json j = read_json(path);
  require_object(j, file, {"total_distance_m", "assignments"});
  std::set<std::string> building_ids, node_ids;
  for (const auto& b : buildings) building_ids.insert(b.id);
  for (const auto& n : net.nodes) node_ids.insert(n.id);

  grid::AllocationResult out;
  out.total_distance_m = get_field<double>(j, "total_distance_m", file);
  auto list = get_field<json>(j, "assignments", file);
  if (!list.is_array()) fail(ErrorCode::SchemaError, file + ": 'assignments' must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = file + " assignments[" + std::to_string(i) + "]";
    require_object(list[i], where, {"building_id", "node_id"});
    auto b = get_field<std::string>(list[i], "building_id", where);
    auto n = get_field<std::string>(list[i], "node_id", where);
    if (!building_ids.count(b)) fail(ErrorCode::DanglingReference, where + ": unknown building '" + b + "'");
    if (!node_ids.count(n)) fail(ErrorCode::DanglingReference, where + ": building '" + b + "' assigned to unknown node '" + n + "'");
    if (!out.node_of.emplace(b, n).second) fail(ErrorCode::SchemaError, where + ": building '" + b + "' assigned twice");
  }
  for (const auto& id : building_ids)
    if (!out.node_of.count(id)) fail(ErrorCode::DanglingReference, file + ": building '" + id + "' is not assigned");
  return out;
}

// --- Bids and outcomes -------------------------------------------------------

struct BidFile {
  Date day;
  bidding::ExclusiveGroup group;
  std::string pricing_mode = "mabp";
};

inline json bids_to_json(const BidFile& f) {
  json bids = json::array();
  for (const auto& b : f.group.bids) bids.push_back({{"profile_mw", b.profile_mw}, {"price_eur", b.price_eur}});
  return {{"day", f.day.iso()}, {"max_bids", f.group.max_bids}, {"pricing_mode", f.pricing_mode}, {"bids", bids}};
}

inline BidFile bids_from_json(const json& j, const std::string& file) {
  require_object(j, file, {"day", "max_bids", "pricing_mode", "bids"});
  BidFile f;
  f.day = Date::parse(get_field<std::string>(j, "day", file));
  f.group.max_bids = get_field<int>(j, "max_bids", file);
  f.pricing_mode = get_field<std::string>(j, "pricing_mode", file);
  if (f.pricing_mode != "mabp" && f.pricing_mode != "truthful")
    fail(ErrorCode::SchemaError, file + ": pricing_mode must be mabp or truthful");
  auto bids = get_field<json>(j, "bids", file);
  if (!bids.is_array()) fail(ErrorCode::SchemaError, file + ": 'bids' must be an array");
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const std::string where = file + " bids[" + std::to_string(i) + "]";
    require_object(bids[i], where, {"profile_mw", "price_eur"});
    f.group.bids.push_back({get_field<std::vector<double>>(bids[i], "profile_mw", where),
                            get_field<double>(bids[i], "price_eur", where)});
  }
  if (static_cast<int>(f.group.bids.size()) > f.group.max_bids)
    fail(ErrorCode::TooManyBids, file + ": " + std::to_string(f.group.bids.size()) + " bids exceed max_bids " +
                                     std::to_string(f.group.max_bids));
  return f;
}

inline json outcome_to_json(const clearing::ClearingOutcome& o) {
  return {{"alpha", o.alpha},
          {"accepted_profile_mw", o.accepted_profile_mw},
          {"payment_eur", o.payment_eur},
          {"surplus_eur", o.surplus_eur}};
}

inline clearing::ClearingOutcome outcome_from_json(const json& j, const std::string& file) {
  require_object(j, file, {"alpha", "accepted_profile_mw", "payment_eur", "surplus_eur"});
  clearing::ClearingOutcome o;
  o.alpha = get_field<std::vector<double>>(j, "alpha", file);
  o.accepted_profile_mw = get_field<std::vector<double>>(j, "accepted_profile_mw", file);
  o.payment_eur = get_field<double>(j, "payment_eur", file);
  o.surplus_eur = get_field<double>(j, "surplus_eur", file);
  return o;
}

// --- Campaign configuration --------------------------------------------------

inline scenarios::WarmupPolicy parse_warmup(const std::string& s) {
  if (s == "strict") return scenarios::WarmupPolicy::Strict;
  if (s == "duplicate_oldest") return scenarios::WarmupPolicy::DuplicateOldest;
  fail(ErrorCode::InvalidArgument, "warmup must be strict or duplicate_oldest, got '" + s + "'");
}

inline std::string to_string(scenarios::WarmupPolicy p) {
  return p == scenarios::WarmupPolicy::Strict ? "strict" : "duplicate_oldest";
}

inline bidding::PricingMode parse_pricing(const std::string& s, double cap = bidding::default_mabp_eur_mwh,
                                          double voll = bidding::default_voll_eur_mwh) {
  bidding::PricingMode m;
  if (s == "truthful") {
    m = bidding::PricingMode::truthful(voll);
  } else if (s == "mabp") {
    m = bidding::PricingMode::mabp(cap);
    m.voll_eur_mwh = voll;
  } else {
    fail(ErrorCode::InvalidArgument, "pricing must be truthful or mabp, got '" + s + "'");
  }
  m.price_cap_eur_mwh = cap;
  return m;
}

/// Campaign file plus the data directory it points at.
struct CampaignFile {
  CampaignConfig config;
  fs::path data_dir = ".";
};

inline const std::set<std::string> campaign_keys = {
    "data_dir",     "start",       "end",           "scenarios",    "max_bids",     "mode",
    "pricing",      "price_cap_eur_mwh",            "voll_eur_mwh", "hp_share_pct", "hp_buildings",
    "seed",         "inject_realized",              "warmup",       "facets",       "v_min_pu",
    "v_max_pu",     "rar",         "cop",           "t_set_C",      "t_min_C",      "t_max_C",
    "dt_h",         "horizon",     "integration",   "s_base_kVA",   "v_base_kV",    "primal_tolerance",
    "dual_tolerance", "mip_rel_gap", "time_limit_s"};

/// Overlays the keys present in `j` on `cfg` (defaults stay where absent).
inline void apply_campaign_json(const json& j, const std::string& file, CampaignFile& out) {
  require_object(j, file, campaign_keys);
  CampaignConfig& c = out.config;
  auto has = [&](const char* k) { return j.contains(k); };
  try {
    if (has("data_dir")) out.data_dir = get_field<std::string>(j, "data_dir", file);
    if (has("start")) c.start = Date::parse(get_field<std::string>(j, "start", file));
    if (has("end")) c.end = Date::parse(get_field<std::string>(j, "end", file));
    if (has("scenarios")) c.scenarios = get_field<int>(j, "scenarios", file);
    if (has("max_bids")) c.max_bids = get_field<int>(j, "max_bids", file);
    if (has("mode")) c.mode = parse_mode(get_field<std::string>(j, "mode", file));
    double cap = has("price_cap_eur_mwh") ? get_field<double>(j, "price_cap_eur_mwh", file) : c.pricing.price_cap_eur_mwh;
    double voll = has("voll_eur_mwh") ? get_field<double>(j, "voll_eur_mwh", file) : c.pricing.voll_eur_mwh;
    std::string pricing = has("pricing") ? get_field<std::string>(j, "pricing", file) : c.pricing.name();
    c.pricing = parse_pricing(pricing, cap, voll);
    c.grid.voll_eur_mwh = voll;
    if (has("hp_share_pct")) c.hp_share_pct = get_field<double>(j, "hp_share_pct", file);
    if (has("hp_buildings")) c.hp_buildings = get_field<std::vector<std::string>>(j, "hp_buildings", file);
    if (has("seed")) c.seed = get_field<std::uint64_t>(j, "seed", file);
    if (has("inject_realized")) c.inject_realized = get_field<bool>(j, "inject_realized", file);
    if (has("warmup")) c.warmup = parse_warmup(get_field<std::string>(j, "warmup", file));
    if (has("facets")) c.grid.facets = get_field<int>(j, "facets", file);
    if (has("v_min_pu")) c.grid.v_min_pu = get_field<double>(j, "v_min_pu", file);
    if (has("v_max_pu")) c.grid.v_max_pu = get_field<double>(j, "v_max_pu", file);
    if (has("rar")) c.grid.rar = get_field<double>(j, "rar", file);
    if (has("cop")) c.comfort.cop = get_field<double>(j, "cop", file);
    if (has("t_set_C")) c.comfort.t_set = get_field<double>(j, "t_set_C", file);
    if (has("t_min_C")) c.comfort.t_min = get_field<double>(j, "t_min_C", file);
    if (has("t_max_C")) c.comfort.t_max = get_field<double>(j, "t_max_C", file);
    if (has("dt_h")) c.comfort.dt = get_field<double>(j, "dt_h", file);
    if (has("horizon")) c.comfort.horizon = get_field<int>(j, "horizon", file);
    if (has("integration")) {
      auto s = get_field<std::string>(j, "integration", file);
      if (s == "implicit") c.comfort.integration = thermal::Integration::Implicit;
      else if (s == "explicit") c.comfort.integration = thermal::Integration::Explicit;
      else fail(ErrorCode::SchemaError, file + ": integration must be implicit or explicit");
    }
    if (has("s_base_kVA")) c.s_base_kva = get_field<double>(j, "s_base_kVA", file);
    if (has("v_base_kV")) c.v_base_kv = get_field<double>(j, "v_base_kV", file);
    if (has("primal_tolerance")) c.solver.primal_feasibility_tolerance = get_field<double>(j, "primal_tolerance", file);
    if (has("dual_tolerance")) c.solver.dual_feasibility_tolerance = get_field<double>(j, "dual_tolerance", file);
    if (has("mip_rel_gap")) c.solver.mip_rel_gap = get_field<double>(j, "mip_rel_gap", file);
    if (has("time_limit_s")) c.solver.time_limit_s = get_field<double>(j, "time_limit_s", file);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError) throw;
    fail(ErrorCode::SchemaError, file + ": " + e.what());
  }
}

inline CampaignFile read_campaign(const fs::path& path) {
  CampaignFile out;
  apply_campaign_json(read_json(path), path.string(), out);
  if (out.data_dir.is_relative()) out.data_dir = path.parent_path() / out.data_dir;
  return out;
}

inline json campaign_to_json(const CampaignConfig& c, const std::string& data_dir = ".") {
  json j = {{"data_dir", data_dir},
            {"start", c.start.iso()},
            {"end", c.end.iso()},
            {"scenarios", c.scenarios},
            {"max_bids", c.max_bids},
            {"mode", to_string(c.mode)},
            {"pricing", c.pricing.name()},
            {"price_cap_eur_mwh", c.pricing.price_cap_eur_mwh},
            {"voll_eur_mwh", c.pricing.voll_eur_mwh},
            {"seed", c.seed},
            {"inject_realized", c.inject_realized},
            {"warmup", to_string(c.warmup)},
            {"facets", c.grid.facets},
            {"v_min_pu", c.grid.v_min_pu},
            {"v_max_pu", c.grid.v_max_pu},
            {"rar", c.grid.rar},
            {"cop", c.comfort.cop},
            {"t_set_C", c.comfort.t_set},
            {"t_min_C", c.comfort.t_min},
            {"t_max_C", c.comfort.t_max},
            {"dt_h", c.comfort.dt},
            {"horizon", c.comfort.horizon},
            {"integration", c.comfort.integration == thermal::Integration::Implicit ? "implicit" : "explicit"},
            {"s_base_kVA", c.s_base_kva},
            {"v_base_kV", c.v_base_kv}};
  if (c.hp_share_pct) j["hp_share_pct"] = *c.hp_share_pct;
  if (c.hp_buildings) j["hp_buildings"] = *c.hp_buildings;
  return j;
}

// --- Instance bundle ---------------------------------------------------------

struct BundlePaths {
  fs::path buildings, weather, prices, nodes, edges, profiles, allocation;

  static BundlePaths in(const fs::path& dir) {
    return {dir / "buildings.csv", dir / "weather.csv", dir / "prices.csv", dir / "nodes.csv",
            dir / "edges.csv",     dir / "profiles.csv", dir / "alloc.json"};
  }
};

/// Reads a bundle as stored. Network, profiles and allocation are optional;
/// nodes and edges come as a pair. Time series must share one day set.
inline Instance read_instance(const BundlePaths& p, int horizon = 24) {
  Instance inst;
  inst.buildings = read_buildings(p.buildings);
  inst.weather = read_weather(p.weather, horizon);
  inst.prices = read_prices(p.prices, horizon);

  auto same_days = [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return false;
    auto ia = a.begin();
    for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib)
      if (ia->first != ib->first) return false;
    return true;
  };
  auto describe = [](const auto& a, const auto& b) {
    for (const auto& [d, v] : a)
      if (!b.count(d)) return d.iso();
    for (const auto& [d, v] : b)
      if (!a.count(d)) return d.iso();
    return std::string("?");
  };
  if (!same_days(inst.weather, inst.prices.days))
    fail(ErrorCode::GridMismatch, p.weather.string() + " and " + p.prices.string() + " cover different days (first difference " +
                                      describe(inst.weather, inst.prices.days) + ")");

  bool has_nodes = fs::exists(p.nodes), has_edges = fs::exists(p.edges);
  if (has_nodes != has_edges) fail(ErrorCode::SchemaError, "nodes.csv and edges.csv must be given together");
  if (has_nodes) inst.network = read_network(p.nodes, p.edges);
  if (fs::exists(p.profiles)) {
    inst.profiles = read_profiles(p.profiles, horizon);
    if (!same_days(inst.profiles, inst.weather))
      fail(ErrorCode::GridMismatch, p.profiles.string() + " and " + p.weather.string() + " cover different days (first difference " +
                                        describe(inst.profiles, inst.weather) + ")");
  }
  if (fs::exists(p.allocation)) {
    if (!inst.network) fail(ErrorCode::SchemaError, p.allocation.string() + " given without a network");
    inst.allocation = read_allocation(p.allocation, inst.buildings, *inst.network);
  }
  return inst;
}

/// Fills days without forecasts by persistence and logs how many were filled.
inline void complete_forecasts(Instance& inst) {
  int filled = scenarios::fill_missing_forecasts(inst.prices);
  if (filled > 0) log::info("no forecast for " + std::to_string(filled) + " day(s); using the persistence forecast");
}

inline Instance load_instance(const fs::path& dir, int horizon = 24) {
  Instance inst = read_instance(BundlePaths::in(dir), horizon);
  complete_forecasts(inst);
  return inst;
}

inline void write_instance(const fs::path& dir, const Instance& inst) {
  write_file(dir / "buildings.csv", format_buildings(inst.buildings));
  write_file(dir / "weather.csv", format_weather(inst.weather));
  write_file(dir / "prices.csv", format_prices(inst.prices));
  if (inst.network) {
    write_file(dir / "nodes.csv", format_nodes(*inst.network));
    write_file(dir / "edges.csv", format_edges(*inst.network));
  }
  if (!inst.profiles.empty()) write_file(dir / "profiles.csv", format_profiles(inst.profiles));
  if (inst.allocation) write_file(dir / "alloc.json", dump_json(allocation_to_json(*inst.allocation)));
}

// --- Reports -----------------------------------------------------------------

inline std::string format_report(const simulate::CampaignReport& rep) {
  std::string s = report_header + "\n";
  for (const auto& d : rep.days) {
    s += d.day.iso() + "," + format_double(d.tc_inf) + "," + format_double(d.tc_cleared) + "," +
         format_double(d.tc_opt) + "," + format_double(d.eta) + "," + format_double(d.shed_kwh) + "," +
         format_double(d.price_std) + "," + format_double(d.runtime_dispatch_s) + "," +
         format_double(d.runtime_clearing_s) + "\n";
  }
  return s;
}

/// HP-only cost decomposition and bid details per day.
inline std::string format_report_detail(const simulate::CampaignReport& rep) {
  std::string s =
      "date,tc_inf_hp_eur,tc_cleared_hp_eur,tc_opt_hp_eur,num_scenarios,num_bids,accepted_bid,fallback,"
      "flexible_buildings,excluded_buildings\n";
  for (const auto& d : rep.days) {
    s += d.day.iso() + "," + format_double(d.tc_inf_hp) + "," + format_double(d.tc_cleared_hp) + "," +
         format_double(d.tc_opt_hp) + "," + std::to_string(d.num_scenarios) + "," + std::to_string(d.num_bids) + "," +
         std::to_string(d.accepted_bid) + "," + bool_field(d.fallback) + "," + std::to_string(d.flexible_count) +
         "," + std::to_string(d.excluded.size()) + "\n";
  }
  return s;
}

inline json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline json summary_to_json(const simulate::CampaignReport& rep, const CampaignConfig& cfg) {
  json failures = json::array();
  for (const auto& f : rep.failures)
    failures.push_back({{"date", f.day.iso()}, {"code", std::string(to_string(f.code))}, {"message", f.message}});
  return {{"mode", to_string(cfg.mode)},
          {"pricing", cfg.pricing.name()},
          {"scenarios", cfg.scenarios},
          {"max_bids", cfg.max_bids},
          {"days", rep.days.size()},
          {"hp_count", rep.hp_count},
          {"tc_inf_eur", rep.tc_inf},
          {"tc_cleared_eur", rep.tc_cleared},
          {"tc_opt_eur", rep.tc_opt},
          {"tc_inf_hp_eur", rep.tc_inf_hp},
          {"tc_cleared_hp_eur", rep.tc_cleared_hp},
          {"tc_opt_hp_eur", rep.tc_opt_hp},
          {"eta_weighted", number_or_null(rep.eta_weighted)},
          {"eta_mean", number_or_null(rep.eta_mean)},
          {"savings_eur", rep.savings_eur},
          {"savings_per_hp_eur", number_or_null(rep.savings_per_hp_eur)},
          {"shed_kwh", rep.shed_kwh},
          {"runtime_dispatch_s", rep.runtime_dispatch_s},
          {"runtime_clearing_s", rep.runtime_clearing_s},
          {"failures", failures}};
}

inline std::string format_schedules(const simulate::DayResult& d) {
  std::string s = "resource_id,hour,power_kw\n";
  for (const auto& [id, sched] : d.awarded_kw)
    for (std::size_t h = 0; h < sched.size(); ++h) s += id + "," + std::to_string(h) + "," + format_double(sched[h]) + "\n";
  return s;
}

/// report.csv, report_detail.csv, summary.json and schedules/<date>.csv.
inline void write_campaign_outputs(const fs::path& dir, const simulate::CampaignReport& rep, const CampaignConfig& cfg) {
  write_file(dir / "report.csv", format_report(rep));
  write_file(dir / "report_detail.csv", format_report_detail(rep));
  write_file(dir / "summary.json", dump_json(summary_to_json(rep, cfg)));
  for (const auto& d : rep.days) write_file(dir / "schedules" / (d.day.iso() + ".csv"), format_schedules(d));
}

}  // namespace flexbid::io
