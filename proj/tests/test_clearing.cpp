#include <gtest/gtest.h>

#include <random>

#include "flexbid/clearing.hpp"

using namespace flexbid;
using namespace flexbid::clearing;
using bidding::BlockBid;
using bidding::ExclusiveGroup;

namespace {

// One-hour bids at price 1 EUR/MWh: profit = p - x.
ExclusiveGroup with_profits(std::vector<double> profits) {
  ExclusiveGroup g;
  for (double p : profits) g.bids.push_back({{1.0}, p + 1.0});
  return g;
}

ExclusiveGroup random_group(std::mt19937_64& rng, int n, int horizon) {
  std::uniform_real_distribution<double> mw(-2.0, 2.0), price(-100.0, 100.0);
  ExclusiveGroup g;
  for (int b = 0; b < n; ++b) {
    BlockBid bid;
    bid.profile_mw.resize(horizon);
    for (auto& v : bid.profile_mw) v = mw(rng);
    bid.price_eur = price(rng) * horizon;
    g.bids.push_back(std::move(bid));
  }
  return g;
}

}  // namespace

TEST(Clear, AllNegativeProfitsReject) {
  auto o = clear(with_profits({-1, -2}), std::vector<double>{1.0});
  EXPECT_EQ(o.alpha, (std::vector<double>{0, 0}));
  EXPECT_EQ(o.surplus_eur, 0.0);
  EXPECT_EQ(o.accepted_bid(), -1);
}

TEST(Clear, UniqueMaximum) {
  auto o = clear(with_profits({5, 3}), std::vector<double>{1.0});
  EXPECT_EQ(o.alpha, (std::vector<double>{1, 0}));
  EXPECT_NEAR(o.surplus_eur, 5.0, 1e-12);
  EXPECT_NEAR(o.payment_eur, 1.0, 1e-12);
}

TEST(Clear, TiesGoToLowestIndexAndEveryBlendIsOptimal) {
  auto g = with_profits({5, 5});
  std::vector<double> prices{1.0};
  auto o = clear(g, prices);
  EXPECT_EQ(o.alpha, (std::vector<double>{1, 0}));
  for (int i = 0; i <= 100; ++i) {
    double a = i / 100.0;
    double surplus = a * bid_profit(g.bids[0], prices, 1.0) + (1 - a) * bid_profit(g.bids[1], prices, 1.0);
    EXPECT_NEAR(surplus, o.surplus_eur, 1e-12);
  }
}

TEST(Oracle, ZeroProfitPrefersRejection) {
  auto g = with_profits({0});
  auto o = clear_oracle(g, std::vector<double>{1.0});
  EXPECT_EQ(o.alpha, (std::vector<double>{0}));
  EXPECT_EQ(clear(g, std::vector<double>{1.0}).alpha, (std::vector<double>{0}));
}

TEST(Oracle, PaidToConsume) {
  ExclusiveGroup g;
  g.bids.push_back({{1.0, 1.0}, 0.0});
  auto o = clear_oracle(g, std::vector<double>{-10.0, 2.0});
  EXPECT_EQ(o.alpha, (std::vector<double>{1}));
  EXPECT_NEAR(o.surplus_eur, 8.0, 1e-12);
}

TEST(Oracle, TooLarge) {
  std::mt19937_64 rng(1);
  auto g = random_group(rng, 33, 2);
  try {
    clear_oracle(g, std::vector<double>{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GroupTooLarge);
  }
}

TEST(Oracle, RandomGroupsAgree) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> price(-50.0, 200.0);
  for (int i = 0; i < 300; ++i) {
    int n = 1 + static_cast<int>(rng() % 24);
    auto g = random_group(rng, n, 24);
    std::vector<double> prices(24);
    for (auto& p : prices) p = price(rng);
    auto a = clear(g, prices);
    auto b = clear_oracle(g, prices);
    EXPECT_NEAR(a.surplus_eur, b.surplus_eur, 1e-9);
    EXPECT_GE(a.surplus_eur, -1e-9);
  }
}

TEST(Clear, ScaleInvariance) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    auto g = random_group(rng, 10, 24);
    std::vector<double> prices(24);
    for (auto& p : prices) p = std::uniform_real_distribution<double>(0, 100)(rng);
    auto base = clear(g, prices);
    auto scaled = g;
    for (auto& b : scaled.bids) b.price_eur *= 3.5;
    auto sp = prices;
    for (auto& p : sp) p *= 3.5;
    EXPECT_EQ(clear(scaled, sp).alpha, base.alpha);
  }
}

TEST(Clear, AddingBidsNeverLowersSurplus) {
  std::mt19937_64 rng(9);
  auto g = random_group(rng, 24, 24);
  std::vector<double> prices(24, 50.0);
  double prev = 0.0;
  ExclusiveGroup sub;
  for (const auto& b : g.bids) {
    sub.bids.push_back(b);
    double s = clear(sub, prices).surplus_eur;
    EXPECT_GE(s, prev - 1e-12);
    prev = s;
  }
  // A zero bid at price zero does not change anything.
  sub.bids.push_back({PowerProfile(24, 0.0), 0.0});
  EXPECT_NEAR(clear(sub, prices).surplus_eur, prev, 1e-12);
}

TEST(Clear, LengthMismatch) {
  auto g = with_profits({1});
  try {
    clear(g, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}
