#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>

#include "flexbid/io.hpp"

using namespace flexbid;
namespace fs = std::filesystem;

namespace {

const fs::path cli = FLEXBID_CLI_PATH;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(const std::string& args) {
  fs::path dir = fs::temp_directory_path();
  fs::path out = dir / "flexbid_cli_stdout.txt", err = dir / "flexbid_cli_stderr.txt";
  std::string cmd = cli.string() + " " + args + " > " + out.string() + " 2> " + err.string();
  int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(out), io::read_file(err)};
}

class Cli : public ::testing::Test {
 protected:
  static fs::path root() { return fs::temp_directory_path() / "flexbid_cli"; }
  static fs::path inst() { return root() / "instance"; }

  static void SetUpTestSuite() {
    fs::remove_all(root());
    fs::create_directories(root());
    Outcome r = run("generate -q --out " + inst().string() +
                " --buildings 6 --days 2 --history-days 4 --seed 4 --scenarios 3");
    ASSERT_EQ(r.code, 0) << r.err;
  }
};

}  // namespace

TEST_F(Cli, GenerateWritesBundle) {
  for (const char* f : {"buildings.csv", "weather.csv", "prices.csv", "nodes.csv", "edges.csv", "profiles.csv", "campaign.json"})
    EXPECT_TRUE(fs::exists(inst() / f)) << f;
  auto c = io::read_campaign(inst() / "campaign.json");
  EXPECT_EQ(c.config.scenarios, 3);
  EXPECT_EQ(c.config.start, (Date{2024, 10, 1}));
  EXPECT_EQ(c.config.end, (Date{2024, 10, 2}));
}

TEST_F(Cli, AllocateAssignsEveryBuilding) {
  fs::path out = root() / "alloc.json";
  Outcome r = run("allocate -q --buildings " + (inst() / "buildings.csv").string() + " --nodes " +
              (inst() / "nodes.csv").string() + " --edges " + (inst() / "edges.csv").string() + " -o " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  Instance bundle = io::read_instance(io::BundlePaths::in(inst()));
  auto a = io::read_allocation(out, bundle.buildings, *bundle.network);
  EXPECT_EQ(a.node_of.size(), 6u);
}

TEST_F(Cli, BidThenClear) {
  fs::path bids = root() / "bids.json", outcome = root() / "outcome.json";
  Outcome r = run("--config " + (inst() / "campaign.json").string() + " -q bid --date 2024-10-02 -o " + bids.string());
  ASSERT_EQ(r.code, 0) << r.err;
  io::BidFile bf = io::bids_from_json(io::read_json(bids), bids.string());
  EXPECT_GE(bf.group.size(), 1u);
  EXPECT_LE(bf.group.size(), 3u);

  r = run("-q clear --bids " + bids.string() + " --prices " + (inst() / "prices.csv").string() + " -o " + outcome.string());
  ASSERT_EQ(r.code, 0) << r.err;
  auto o = io::outcome_from_json(io::read_json(outcome), outcome.string());
  EXPECT_EQ(o.alpha.size(), bf.group.size());
  double sum = 0.0;
  for (double a : o.alpha) sum += a;
  EXPECT_LE(sum, 1.0 + 1e-12);
}

TEST_F(Cli, SimulateWritesReport) {
  fs::path out = root() / "results";
  Outcome r = run("--config " + (inst() / "campaign.json").string() + " -q simulate --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("eta"), std::string::npos);
  for (const char* f : {"report.csv", "report_detail.csv", "summary.json"}) EXPECT_TRUE(fs::exists(out / f)) << f;
  auto s = io::read_json(out / "summary.json");
  EXPECT_EQ(s["days"].get<int>(), 2);
}

TEST_F(Cli, CommandLineOverridesConfig) {
  fs::path out = root() / "results_override";
  Outcome r = run("--config " + (inst() / "campaign.json").string() + " -q --scenarios 2 --mode integrated simulate --out " +
              out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  auto s = io::read_json(out / "summary.json");
  EXPECT_EQ(s["scenarios"].get<int>(), 2);
  EXPECT_EQ(s["mode"].get<std::string>(), "integrated");
}

TEST_F(Cli, ReportWritesSweeps) {
  fs::path out = root() / "report";
  Outcome r = run("--config " + (inst() / "campaign.json").string() + " -q report --bids-list 1,3 --shares 50,100 --skip-runtime --out " +
              out.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"savings_vs_volatility.csv", "efficiency_vs_bids.csv", "efficiency_vs_share.csv", "runtime_vs_share.csv"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  EXPECT_FALSE(fs::exists(out / "runtime_vs_bids.csv"));
}

TEST_F(Cli, ErrorsExitNonzeroWithJson) {
  Outcome r = run("--json-errors --config " + (inst() / "campaign.json").string() + " bid --date 2030-01-01");
  EXPECT_EQ(r.code, 2);
  // Log lines may precede it; the error object is the last line.
  std::string last = r.err.substr(0, r.err.size() - 1);
  last = last.substr(last.rfind('\n') + 1);
  auto j = nlohmann::json::parse(last);
  EXPECT_TRUE(j.contains("error"));
  EXPECT_TRUE(j.contains("message"));

  r = run("--config " + (root() / "missing.json").string() + " simulate");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);

  r = run("simulate --no-such-flag");
  EXPECT_NE(r.code, 0);
}
