#pragma once

#include <optional>
#include <span>
#include <vector>

#include "autobid/impression_log.hpp"

namespace autobid {

inline constexpr double kAdvantageClip = 3.0;

struct GroupSpec {
  int group_id{0};
  Objective objective{Objective::Click};
  std::vector<int> members;  // sorted ad ids
  double initial_budget{0.0};
};

struct MeanAgentState {
  double remaining_budget{0.0};
  double mean_value{0.0};
  int timesteps_left{0};
};

// One group per objective present in the log, ordered CLICK, CONV, CART.
// Initial budgets are left at 0. Throws DomainError on an empty log or when
// an ad id appears under two objectives.
std::vector<GroupSpec> group_by_objective(std::span<const ImpressionRecord> log);

// Mean-agent budget: the average of member budgets.
double mean_budget(std::span<const double> member_budgets);

struct MeanValue {
  double value{0.0};
  bool present{false};
};

// Average value over all records of `objective` among `records` (one
// timestep). Absent group: value 0, present false.
MeanValue mean_value(std::span<const ImpressionRecord> records, Objective objective);

// Per-ad bid from the group's mean bid: mean_bid * clip(value / mean_value, 0, 3).
// Throws DomainError when mean_value <= 0.
double derive_bid(double mean_bid, double value, double mean_value);

// Result of one impression opportunity in the grouped auction.
struct OpportunityOutcome {
  int opportunity_id{0};
  std::optional<int> winner_ad;
  std::optional<std::size_t> winner_group;  // index into the group list
  double winning_value{0.0};
  double payment{0.0};  // runner-up eCPM score
};

// r_i^t: value won by the group over the timestep, divided by |E_t|.
double group_reward(std::span<const OpportunityOutcome> outcomes, std::size_t group,
                    std::size_t num_opportunities);

// p_i^t: runner-up scores summed over the opportunities the group won.
double group_payment(std::span<const OpportunityOutcome> outcomes, std::size_t group);

}  // namespace autobid
