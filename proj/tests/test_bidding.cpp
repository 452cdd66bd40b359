#include <gtest/gtest.h>

#include <random>

#include "flexbid/bidding.hpp"

using namespace flexbid;
using namespace flexbid::bidding;

namespace {
ResourceSchedule res(const std::string& id, PowerProfile p, double e) { return {id, std::move(p), e}; }
}  // namespace

TEST(ExclusiveGroup, SumsAndConvertsUnits) {
  std::vector<ScenarioSchedules> s{{res("a", {1, 0}, 1), res("b", {0, 1}, 1)}};
  auto g = build_exclusive_group(s, PricingMode::mabp(), 24);
  ASSERT_EQ(g.group.size(), 1u);
  EXPECT_DOUBLE_EQ(g.group.bids[0].profile_mw[0], 0.001);
  EXPECT_DOUBLE_EQ(g.group.bids[0].profile_mw[1], 0.001);
}

TEST(ExclusiveGroup, MabpPrice) {
  std::vector<ScenarioSchedules> s{{res("a", {4, 2}, 6), res("b", {2, 2}, 4)}, {res("a", {2, 4}, 6), res("b", {3, 1}, 4)}};
  auto g = build_exclusive_group(s, PricingMode::mabp(4000), 24);
  ASSERT_EQ(g.group.size(), 2u);
  for (const auto& b : g.group.bids) EXPECT_DOUBLE_EQ(b.price_eur, 40.0);
}

TEST(ExclusiveGroup, TruthfulPriceConstantAcrossBids) {
  std::vector<ScenarioSchedules> s{{res("a", {4, 2}, 6)}, {res("a", {1, 5}, 6)}, {res("a", {6, 0}, 6)}};
  auto g = build_exclusive_group(s, PricingMode::truthful(10000), 24);
  ASSERT_EQ(g.group.size(), 3u);
  for (const auto& b : g.group.bids) EXPECT_NEAR(b.price_eur, 10000 * 0.006, 1e-12);
}

TEST(ExclusiveGroup, MergesDuplicateProfiles) {
  // Same aggregate, different per-resource split: merged, lowest index kept.
  std::vector<ScenarioSchedules> s{
      {res("a", {1, 0}, 1), res("b", {0, 1}, 1)},
      {res("a", {0, 1}, 1), res("b", {1, 0}, 1)},
      {res("a", {2, 0}, 1), res("b", {0, 0}, 1)}};
  auto g = build_exclusive_group(s, PricingMode::mabp(), 24);
  ASSERT_EQ(g.group.size(), 2u);
  EXPECT_EQ(g.ledger.bid_scenarios[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(g.ledger.representative(0), 0);
  EXPECT_EQ(g.ledger.bid_scenarios[1], (std::vector<int>{2}));
}

TEST(ExclusiveGroup, TooManyBidsAndEmpty) {
  std::vector<ScenarioSchedules> s;
  for (int i = 0; i < 3; ++i) s.push_back({res("a", {double(i), 0}, 1)});
  try {
    build_exclusive_group(s, PricingMode::mabp(), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyBids);
  }
  try {
    build_exclusive_group({}, PricingMode::mabp(), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(ExclusiveGroup, Idempotent) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 3);
  std::vector<ScenarioSchedules> s(6);
  for (auto& scen : s)
    for (int r = 0; r < 4; ++r) scen.push_back(res("r" + std::to_string(r), {u(rng), u(rng), u(rng)}, 3));
  auto a = build_exclusive_group(s, PricingMode::mabp(), 24);
  auto b = build_exclusive_group(s, PricingMode::mabp(), 24);
  ASSERT_EQ(a.group.size(), b.group.size());
  for (std::size_t i = 0; i < a.group.size(); ++i) {
    EXPECT_EQ(a.group.bids[i].profile_mw, b.group.bids[i].profile_mw);
    EXPECT_EQ(a.group.bids[i].price_eur, b.group.bids[i].price_eur);
  }
}

TEST(ExclusiveGroup, LedgerConsistency) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0, 5);
  std::vector<ScenarioSchedules> s(8);
  for (auto& scen : s)
    for (int r = 0; r < 10; ++r) {
      PowerProfile p(24);
      for (auto& v : p) v = u(rng);
      scen.push_back(res("r" + std::to_string(r), p, 0));
    }
  auto g = build_exclusive_group(s, PricingMode::mabp(), 24);
  for (std::size_t b = 0; b < g.group.size(); ++b) {
    int sc = g.ledger.representative(b);
    for (int t = 0; t < 24; ++t) {
      double kw = 0;
      for (int r = 0; r < 10; ++r) kw += g.ledger.schedules_kw[sc][r][t];
      EXPECT_NEAR(kw / 1000.0, g.group.bids[b].profile_mw[t], 1e-9);
    }
  }
}

TEST(Disaggregate, FullHalfAndZeroAcceptance) {
  std::vector<ScenarioSchedules> s{
      {res("a", {1, 0}, 1), res("b", {3, 3}, 6)},
      {res("a", {0, 1}, 1), res("b", {4, 3}, 7)},
      {res("a", {0.5, 0.5}, 1), res("b", {6, 0}, 6)}};
  auto g = build_exclusive_group(s, PricingMode::mabp(), 24);
  auto full = disaggregate(g.ledger, std::vector<double>{0, 1, 0});
  EXPECT_EQ(full["a"], (PowerProfile{0, 1}));
  EXPECT_EQ(full["b"], (PowerProfile{4, 3}));
  auto half = disaggregate(g.ledger, std::vector<double>{0.5, 0.5, 0});
  EXPECT_EQ(half["a"], (PowerProfile{0.5, 0.5}));
  EXPECT_EQ(half["b"], (PowerProfile{3.5, 3}));
  auto none = disaggregate(g.ledger, std::vector<double>{0, 0, 0});
  EXPECT_EQ(none["a"], (PowerProfile{0, 0}));
}

TEST(Disaggregate, RejectsBadAlpha) {
  std::vector<ScenarioSchedules> s{{res("a", {1, 0}, 1)}, {res("a", {0, 1}, 1)}};
  auto g = build_exclusive_group(s, PricingMode::mabp(), 24);
  for (auto alpha : {std::vector<double>{0.7, 0.7}, std::vector<double>{-0.1, 0.5}, std::vector<double>{1.5, 0}}) {
    try {
      disaggregate(g.ledger, alpha);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::AlphaOutOfRange);
    }
  }
  EXPECT_THROW(disaggregate(g.ledger, std::vector<double>{1}), Error);
}
