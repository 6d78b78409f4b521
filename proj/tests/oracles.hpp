#pragma once

// Reference implementations used only by the tests. They are written
// independently of the library (different formulas or brute force) so that
// agreement is evidence of correctness rather than self-consistency.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "autobid/auction.hpp"
#include "autobid/multi_agent_env.hpp"

namespace oracle {

struct SortedAuction {
  std::optional<std::size_t> winner;
  double payment{0.0};
};

// Rank every bid by score (ties: lower position first), winner is the head
// when its score is positive, payment is the score in second place.
inline SortedAuction sort_auction(const std::vector<autobid::Bid>& bids) {
  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bids[a].amount * bids[a].quality > bids[b].amount * bids[b].quality;
  });
  SortedAuction out;
  const double top = bids[order[0]].amount * bids[order[0]].quality;
  if (top <= 0.0) return out;
  out.winner = order[0];
  if (order.size() > 1) out.payment = bids[order[1]].amount * bids[order[1]].quality;
  return out;
}

// alpha_i = 1 / sum_j exp((b_j - b_i) / tau), in long double.
inline std::vector<double> softmax_pairwise(const std::vector<double>& bids, double tau) {
  std::vector<double> out(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    long double s = 0.0L;
    for (double bj : bids) s += std::exp(static_cast<long double>(bj - bids[i]) / tau);
    out[i] = static_cast<double>(1.0L / s);
  }
  return out;
}

// Platform revenue re-derived from the recorded auctions alone.
inline double revenue_from_impressions(const std::vector<autobid::ImpressionTrace>& impressions) {
  double total = 0.0;
  for (const auto& imp : impressions) total += sort_auction(imp.bids).payment;
  return total;
}

// Pearson chi-square statistic against a uniform expectation.
inline double chi_square_uniform(const std::vector<long>& counts) {
  double n = 0.0;
  for (long c : counts) n += static_cast<double>(c);
  const double expected = n / static_cast<double>(counts.size());
  double stat = 0.0;
  for (long c : counts) stat += (c - expected) * (c - expected) / expected;
  return stat;
}

// Upper 0.1% critical values of the chi-square distribution.
inline constexpr double kChiSquare20 = 45.315;  // 20 degrees of freedom
inline constexpr double kChiSquare99 = 148.23;  // 99 degrees of freedom

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace oracle
