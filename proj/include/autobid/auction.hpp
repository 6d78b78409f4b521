#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace autobid {

struct Bid {
  std::size_t agent_id{0};
  double amount{0.0};
  // eCPM multiplier (pCTR proxy); 1 in the two-agent environment.
  double quality{1.0};

  double score() const noexcept { return quality * amount; }
};

struct AuctionOutcome {
  std::optional<std::size_t> winner;  // position in the bid list
  std::vector<int> win_flags;
  double payment{0.0};
  std::vector<double> raw_rewards;
};

// Single-slot second-price auction ranked by eCPM (quality x amount).
// The highest score wins, ties going to the lowest position; the winner pays
// the highest losing score (0 without a positive runner-up) and collects its
// value. No positive score means no winner.
// Throws DomainError on an empty bid list, negative amount or quality, or a
// value list of different length.
AuctionOutcome run_auction(std::span<const Bid> bids, std::span<const double> values);

// Highest losing score only; cheaper than run_auction when values are unused.
struct Clearing {
  std::optional<std::size_t> winner;
  double payment{0.0};
};
Clearing clear_auction(std::span<const Bid> bids);

// Budget masking: an agent whose remaining budget is not positive bids 0.
Bid mask_bid(Bid bid, double remaining_budget) noexcept;

}  // namespace autobid
