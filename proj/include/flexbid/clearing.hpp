#pragma once

// Price-taking acceptance of one exclusive group at exogenous prices. The
// acceptance LP has the simplex as feasible region, so an optimum fully
// accepts a bid of maximal positive profit or rejects the group.

#include <vector>

#include "flexbid/bidding.hpp"
#include "flexbid/common.hpp"

namespace flexbid::clearing {

struct ClearingOutcome {
  std::vector<double> alpha;
  PowerProfile accepted_profile_mw;
  double payment_eur = 0.0;
  double surplus_eur = 0.0;

  /// Index of the fully accepted bid, or -1 on rejection.
  int accepted_bid() const {
    for (std::size_t b = 0; b < alpha.size(); ++b)
      if (alpha[b] == 1.0) return static_cast<int>(b);
    return -1;
  }
};

namespace detail {
inline void check_lengths(const bidding::ExclusiveGroup& group, std::span<const double> prices) {
  for (std::size_t b = 0; b < group.bids.size(); ++b) {
    if (group.bids[b].profile_mw.size() != prices.size())
      fail(ErrorCode::LengthMismatch, "bid " + std::to_string(b) + " has " +
                                          std::to_string(group.bids[b].profile_mw.size()) +
                                          " steps, prices have " + std::to_string(prices.size()));
  }
}
}  // namespace detail

/// Profit of a single bid at the given prices: p_b - <λ, x_b> (EUR).
inline double bid_profit(const bidding::BlockBid& bid, std::span<const double> prices, double dt) {
  return bid.price_eur - dt * dot(prices, bid.profile_mw);
}

/// Optimal acceptance. Ties go to the lowest bid index; zero profit rejects.
inline ClearingOutcome clear(const bidding::ExclusiveGroup& group, std::span<const double> prices,
                             double dt = 1.0) {
  detail::check_lengths(group, prices);
  ClearingOutcome out;
  out.alpha.assign(group.bids.size(), 0.0);
  out.accepted_profile_mw.assign(prices.size(), 0.0);

  int best = -1;
  double best_profit = 0.0;
  for (std::size_t b = 0; b < group.bids.size(); ++b) {
    double profit = bid_profit(group.bids[b], prices, dt);
    if (profit > best_profit) {
      best_profit = profit;
      best = static_cast<int>(b);
    }
  }
  if (best < 0) return out;

  out.alpha[best] = 1.0;
  out.accepted_profile_mw = group.bids[best].profile_mw;
  out.payment_eur = dt * dot(prices, out.accepted_profile_mw);
  out.surplus_eur = best_profit;
  return out;
}

inline constexpr std::size_t oracle_max_bids = 32;

/// Enumeration oracle: evaluates rejection and every vertex of the
/// acceptance simplex through the full outcome (accepted profile, payment,
/// surplus) and keeps the best. Rejection is listed first so it wins ties.
inline ClearingOutcome clear_oracle(const bidding::ExclusiveGroup& group,
                                    std::span<const double> prices, double dt = 1.0) {
  if (group.bids.size() > oracle_max_bids)
    fail(ErrorCode::GroupTooLarge, "oracle supports at most 32 bids, got " + std::to_string(group.bids.size()));
  detail::check_lengths(group, prices);

  auto evaluate = [&](const std::vector<double>& alpha) {
    ClearingOutcome o;
    o.alpha = alpha;
    o.accepted_profile_mw.assign(prices.size(), 0.0);
    double value = 0.0;
    for (std::size_t b = 0; b < alpha.size(); ++b) {
      value += alpha[b] * group.bids[b].price_eur;
      for (std::size_t t = 0; t < prices.size(); ++t)
        o.accepted_profile_mw[t] += alpha[b] * group.bids[b].profile_mw[t];
    }
    o.payment_eur = 0.0;
    for (std::size_t t = 0; t < prices.size(); ++t)
      o.payment_eur += dt * prices[t] * o.accepted_profile_mw[t];
    o.surplus_eur = value - o.payment_eur;
    return o;
  };

  ClearingOutcome best = evaluate(std::vector<double>(group.bids.size(), 0.0));
  for (std::size_t b = 0; b < group.bids.size(); ++b) {
    std::vector<double> alpha(group.bids.size(), 0.0);
    alpha[b] = 1.0;
    ClearingOutcome cand = evaluate(alpha);
    if (cand.surplus_eur > best.surplus_eur) best = std::move(cand);
  }
  return best;
}

}  // namespace flexbid::clearing
