#include "autobid/meanfield.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "autobid/errors.hpp"

namespace autobid {

std::vector<GroupSpec> group_by_objective(std::span<const ImpressionRecord> log) {
  if (log.empty()) throw DomainError("group_by_objective: empty log");
  std::map<int, Objective> owner;
  std::map<Objective, std::set<int>> members;
  for (const auto& r : log) {
    const auto [it, inserted] = owner.emplace(r.ad_id, r.group);
    if (!inserted && it->second != r.group)
      throw DomainError("group_by_objective: ad " + std::to_string(r.ad_id) +
                        " carries two objectives");
    members[r.group].insert(r.ad_id);
  }
  std::vector<GroupSpec> groups;
  for (const auto& [objective, ads] : members) {
    GroupSpec g;
    g.group_id = static_cast<int>(groups.size());
    g.objective = objective;
    g.members.assign(ads.begin(), ads.end());
    groups.push_back(std::move(g));
  }
  return groups;
}

double mean_budget(std::span<const double> member_budgets) {
  if (member_budgets.empty()) throw DomainError("mean_budget: no members");
  return std::accumulate(member_budgets.begin(), member_budgets.end(), 0.0) /
         static_cast<double>(member_budgets.size());
}

MeanValue mean_value(std::span<const ImpressionRecord> records, Objective objective) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records)
    if (r.group == objective) {
      sum += r.value;
      ++n;
    }
  if (n == 0) return {};
  return {sum / static_cast<double>(n), true};
}

double derive_bid(double mean_bid, double value, double mean_value) {
  if (!(mean_value > 0.0)) throw DomainError("derive_bid: mean_value must be positive");
  const double advantage = std::clamp(value / mean_value, 0.0, kAdvantageClip);
  return mean_bid * advantage;
}

double group_reward(std::span<const OpportunityOutcome> outcomes, std::size_t group,
                    std::size_t num_opportunities) {
  if (num_opportunities == 0) throw DomainError("group_reward: no opportunities");
  double won = 0.0;
  for (const auto& o : outcomes)
    if (o.winner_group == group) won += o.winning_value;
  return won / static_cast<double>(num_opportunities);
}

double group_payment(std::span<const OpportunityOutcome> outcomes, std::size_t group) {
  double paid = 0.0;
  for (const auto& o : outcomes)
    if (o.winner_group == group) paid += o.payment;
  return paid;
}

}  // namespace autobid
