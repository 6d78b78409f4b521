#include "autobid/auction.hpp"

#include <cmath>

#include "autobid/errors.hpp"

namespace autobid {

Clearing clear_auction(std::span<const Bid> bids) {
  if (bids.empty()) throw DomainError("run_auction: empty bid list");
  double best = 0.0;
  double second = 0.0;
  std::optional<std::size_t> winner;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const Bid& b = bids[i];
    if (!(b.amount >= 0.0) || !(b.quality >= 0.0) || !std::isfinite(b.amount) ||
        !std::isfinite(b.quality))
      throw DomainError("run_auction: bid amount and quality must be finite and non-negative");
    const double s = b.score();
    if (s > best) {
      second = best;
      best = s;
      winner = i;
    } else if (s > second) {
      second = s;
    }
  }
  // Ties at the top: the earlier bidder keeps the win and the later one is
  // the runner-up at the same score, handled by the `s > second` branch.
  return {winner, winner ? second : 0.0};
}

AuctionOutcome run_auction(std::span<const Bid> bids, std::span<const double> values) {
  if (values.size() != bids.size())
    throw DomainError("run_auction: bids and values differ in length");
  const Clearing c = clear_auction(bids);
  AuctionOutcome out;
  out.winner = c.winner;
  out.payment = c.payment;
  out.win_flags.assign(bids.size(), 0);
  out.raw_rewards.assign(bids.size(), 0.0);
  if (c.winner) {
    out.win_flags[*c.winner] = 1;
    out.raw_rewards[*c.winner] = values[*c.winner];
  }
  return out;
}

Bid mask_bid(Bid bid, double remaining_budget) noexcept {
  if (!(remaining_budget > 0.0)) bid.amount = 0.0;
  return bid;
}

}  // namespace autobid
