#include <gtest/gtest.h>

#include <map>
#include <set>

#include "autobid/errors.hpp"
#include "autobid/meanfield.hpp"

using namespace autobid;

namespace {

ImpressionRecord rec(int opp, int ad, Objective g, double value, double quality = 1.0, double msb = 0.5) {
  return {0, 0, opp, ad, g, value, quality, msb};
}

}  // namespace

TEST(GroupByObjective, ThreeObjectivesGiveThreeGroups) {
  LogGeneratorConfig config;
  config.recalled_per_group = 4;
  const auto log = generate_log(config, 1);
  const auto groups = group_by_objective(log);
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_EQ(groups[0].objective, Objective::Click);
  EXPECT_EQ(groups[1].objective, Objective::Conv);
  EXPECT_EQ(groups[2].objective, Objective::Cart);
  std::set<int> ads;
  for (const auto& r : log) ads.insert(r.ad_id);
  std::size_t total = 0;
  std::set<int> union_members;
  for (const auto& g : groups) {
    EXPECT_FALSE(g.members.empty());
    total += g.members.size();
    union_members.insert(g.members.begin(), g.members.end());
  }
  EXPECT_EQ(total, ads.size());
  EXPECT_EQ(union_members, ads);
}

TEST(GroupByObjective, SingleObjectiveAndErrors) {
  const ImpressionLog log{rec(0, 1, Objective::Conv, 0.2), rec(0, 2, Objective::Conv, 0.3)};
  const auto groups = group_by_objective(log);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].members, (std::vector<int>{1, 2}));
  EXPECT_THROW(group_by_objective(ImpressionLog{}), DomainError);
  const ImpressionLog clash{rec(0, 1, Objective::Conv, 0.2), rec(1, 1, Objective::Cart, 0.3)};
  EXPECT_THROW(group_by_objective(clash), DomainError);
}

TEST(MeanValue, ArithmeticMeanWithPresenceFlag) {
  const ImpressionLog recs{rec(0, 1, Objective::Click, 0.2), rec(1, 2, Objective::Click, 0.4),
                           rec(2, 3, Objective::Click, 0.6), rec(0, 4, Objective::Conv, 0.7)};
  const auto click = mean_value(recs, Objective::Click);
  EXPECT_TRUE(click.present);
  EXPECT_NEAR(click.value, 0.4, 1e-15);
  EXPECT_EQ(mean_value(recs, Objective::Conv).value, 0.7);
  const auto cart = mean_value(recs, Objective::Cart);
  EXPECT_FALSE(cart.present);
  EXPECT_EQ(cart.value, 0.0);
}

TEST(MeanValue, MatchesFullScanOverGeneratedLog) {
  LogGeneratorConfig config;
  config.recalled_per_group = 3;
  const auto log = generate_log(config, 2);
  std::map<std::pair<int, Objective>, std::pair<double, int>> scan;
  for (const auto& r : log) {
    auto& s = scan[{r.timestep, r.group}];
    s.first += r.value;
    ++s.second;
  }
  for (int t = 0; t < config.timesteps; ++t) {
    ImpressionLog at_t;
    for (const auto& r : log)
      if (r.timestep == t) at_t.push_back(r);
    for (const auto& g : config.groups) {
      const auto& s = scan.at({t, g.objective});
      EXPECT_NEAR(mean_value(at_t, g.objective).value, s.first / s.second, 1e-12);
    }
  }
}

TEST(DeriveBid, ClippedAdvantage) {
  EXPECT_EQ(derive_bid(2.0, 0.3, 0.3), 2.0);
  EXPECT_EQ(derive_bid(2.0, 1.5, 0.3), 6.0);
  EXPECT_EQ(derive_bid(0.0, 9.0, 0.3), 0.0);
  EXPECT_THROW(derive_bid(1.0, 0.5, 0.0), DomainError);
  for (double v = 0.0; v < 5.0; v += 0.1) {
    const double b = derive_bid(1.25, v, 0.7);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 3.0 * 1.25);
  }
}

TEST(MeanBudget, AverageOfMembers) {
  const std::vector<double> budgets{1.0, 2.0, 6.0};
  EXPECT_EQ(mean_budget(budgets), 3.0);
  EXPECT_THROW(mean_budget(std::vector<double>{}), DomainError);
}

TEST(GroupReward, ValueWonOverOpportunities) {
  std::vector<OpportunityOutcome> none{{0, std::nullopt, std::nullopt, 0.0, 0.0}};
  EXPECT_EQ(group_reward(none, 0, 1), 0.0);
  std::vector<OpportunityOutcome> all;
  const double values[] = {0.1, 0.2, 0.3, 0.4};
  for (int e = 0; e < 4; ++e) all.push_back({e, 10 + e, std::size_t{0}, values[e], 0.5});
  EXPECT_NEAR(group_reward(all, 0, 4), 0.25, 1e-15);
  EXPECT_EQ(group_reward(all, 1, 4), 0.0);
  EXPECT_THROW(group_reward(all, 0, 0), DomainError);
}

TEST(GroupPayment, SumOfRunnerUpScores) {
  std::vector<OpportunityOutcome> out{{0, 3, std::size_t{1}, 0.4, 1.5}};
  EXPECT_EQ(group_payment(out, 1), 1.5);
  EXPECT_EQ(group_payment(out, 0), 0.0);
  out.push_back({1, 4, std::size_t{0}, 0.2, 0.75});
  out.push_back({2, std::nullopt, std::nullopt, 0.0, 0.0});
  EXPECT_EQ(group_payment(out, 0) + group_payment(out, 1), 2.25);
  EXPECT_NEAR(group_reward(out, 0, 3) * 3 + group_reward(out, 1, 3) * 3, 0.6, 1e-15);
}
