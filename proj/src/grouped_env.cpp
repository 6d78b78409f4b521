#include "autobid/grouped_env.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "autobid/auction.hpp"
#include "autobid/errors.hpp"

namespace autobid {

GroupedEnv::GroupedEnv(const ImpressionLog& log, std::vector<GroupSpec> groups)
    : groups_(std::move(groups)) {
  if (log.empty()) throw DomainError("GroupedEnv: empty log");
  if (groups_.empty()) throw DomainError("GroupedEnv: no groups");

  ImpressionLog sorted = log;
  const auto key = [](const ImpressionRecord& r) {
    return std::tie(r.episode, r.timestep, r.opportunity_id, r.ad_id);
  };
  std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (key(sorted[i - 1]) == key(sorted[i]))
      throw DomainError("GroupedEnv: duplicate (episode, timestep, opportunity, ad) record");

  std::map<int, std::map<int, std::vector<ImpressionRecord>>> by_episode;
  for (const auto& r : sorted) {
    group_index(r.group);  // validates membership
    by_episode[r.episode][r.timestep].push_back(r);
  }

  for (auto& [id, steps] : by_episode) {
    Episode ep;
    ep.id = id;
    ep.max_values.assign(groups_.size(), 0.0);
    int expected = 0;
    for (auto& [t, records] : steps) {
      if (t != expected) throw DomainError("GroupedEnv: episode " + std::to_string(id) + " skips timestep " + std::to_string(expected));
      ++expected;
      Timestep ts;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (i == 0 || records[i].opportunity_id != records[i - 1].opportunity_id)
          ts.opportunity_starts.push_back(i);
        ep.max_values[group_index(records[i].group)] += records[i].value;
      }
      ts.records = std::move(records);
      ep.timesteps.push_back(std::move(ts));
    }
    if (episode_length_ == 0) episode_length_ = static_cast<int>(ep.timesteps.size());
    if (static_cast<int>(ep.timesteps.size()) != episode_length_)
      throw DomainError("GroupedEnv: episodes differ in length");
    episodes_.push_back(std::move(ep));
  }

  budgets_.assign(groups_.size(), 0.0);
  for (std::size_t g = 0; g < groups_.size(); ++g) budgets_[g] = groups_[g].initial_budget;
  forced_manual_.assign(groups_.size(), false);
  reset(0);
}

std::size_t GroupedEnv::group_index(Objective objective) const {
  for (std::size_t g = 0; g < groups_.size(); ++g)
    if (groups_[g].objective == objective) return g;
  throw DomainError("GroupedEnv: record objective " + std::string(to_string(objective)) +
                    " has no group");
}

std::vector<std::string> GroupedEnv::agent_labels() const {
  std::vector<std::string> labels;
  for (const auto& g : groups_) labels.emplace_back(to_string(g.objective));
  return labels;
}

void GroupedEnv::reset(std::uint64_t key) {
  episode_ = static_cast<std::size_t>(key % episodes_.size());
  timestep_ = 0;
  remaining_ = budgets_;
  last_outcomes_.clear();
}

int GroupedEnv::current_episode_id() const { return episodes_[episode_].id; }

std::span<const ImpressionRecord> GroupedEnv::current_records() const {
  if (done()) return {};
  return episodes_[episode_].timesteps[static_cast<std::size_t>(timestep_)].records;
}

std::vector<MeanAgentState> GroupedEnv::mean_agent_states() const {
  std::vector<MeanAgentState> states(groups_.size());
  const auto records = current_records();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    states[g].remaining_budget = remaining_[g];
    states[g].mean_value = mean_value(records, groups_[g].objective).value;
    states[g].timesteps_left = episode_length_ - timestep_;
  }
  return states;
}

std::vector<Observation> GroupedEnv::observe() const {
  std::vector<Observation> obs(groups_.size());
  const auto records = current_records();
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    const double b0 = budgets_[g];
    obs[g].budget_fraction = b0 > 0.0 ? remaining_[g] / b0 : 0.0;
    obs[g].value = mean_value(records, groups_[g].objective).value;
    obs[g].time_fraction =
        static_cast<double>(episode_length_ - timestep_) / static_cast<double>(episode_length_);
    double msb = 0.0;
    std::size_t n = 0;
    for (const auto& r : records)
      if (r.group == groups_[g].objective) {
        msb += r.msb;
        ++n;
      }
    obs[g].manual_bid = n ? msb / static_cast<double>(n) : 0.0;
  }
  return obs;
}

StepReport GroupedEnv::step(std::span<const AgentBid> bids) {
  if (done()) throw StateError("GroupedEnv::step: episode already terminated");
  const std::size_t n = groups_.size();
  if (bids.size() != n) throw DomainError("GroupedEnv::step: one bid per group required");

  const auto& ts = episodes_[episode_].timesteps[static_cast<std::size_t>(timestep_)];
  std::vector<double> means(n);
  std::vector<bool> manual(n);
  StepReport report;
  report.submitted_bids.resize(n);
  for (std::size_t g = 0; g < n; ++g) {
    means[g] = mean_value(ts.records, groups_[g].objective).value;
    manual[g] = forced_manual_[g] || bids[g].manual;
    if (!manual[g] && !(bids[g].amount >= 0.0))
      throw DomainError("GroupedEnv::step: negative mean bid");
    double submitted = bids[g].amount;
    if (manual[g]) {
      // Manual groups report the mean of their logged bids.
      double sum = 0.0;
      std::size_t k = 0;
      for (const auto& r : ts.records)
        if (r.group == groups_[g].objective) {
          sum += r.msb;
          ++k;
        }
      submitted = k ? sum / static_cast<double>(k) : 0.0;
    }
    report.submitted_bids[g] = remaining_[g] > 0.0 ? submitted : 0.0;
  }

  last_outcomes_.clear();
  std::vector<Bid> auction;
  std::vector<std::size_t> owners;
  std::vector<double> values;
  for (std::size_t s = 0; s < ts.opportunity_starts.size(); ++s) {
    const std::size_t begin = ts.opportunity_starts[s];
    const std::size_t end =
        s + 1 < ts.opportunity_starts.size() ? ts.opportunity_starts[s + 1] : ts.records.size();
    auction.clear();
    owners.clear();
    values.clear();
    for (std::size_t i = begin; i < end; ++i) {
      const auto& r = ts.records[i];
      const std::size_t g = group_index(r.group);
      double amount = 0.0;
      if (manual[g])
        amount = r.msb;
      else if (means[g] > 0.0)
        amount = derive_bid(bids[g].amount, r.value, means[g]);
      const Bid masked = mask_bid(Bid{auction.size(), amount, r.quality}, remaining_[g]);
      auction.push_back(masked);
      owners.push_back(g);
      values.push_back(r.value);
    }
    const Clearing c = clear_auction(auction);
    OpportunityOutcome out;
    out.opportunity_id = ts.records[begin].opportunity_id;
    if (c.winner) {
      out.winner_ad = ts.records[begin + *c.winner].ad_id;
      out.winner_group = owners[*c.winner];
      out.winning_value = values[*c.winner];
      out.payment = c.payment;
    }
    if (impressions_) {
      ImpressionTrace trace;
      trace.step = timestep_;
      trace.bids = auction;
      trace.owners = owners;
      trace.values = values;
      trace.payment = c.payment;
      impressions_->push_back(std::move(trace));
    }
    last_outcomes_.push_back(out);
  }

  const std::size_t num_opportunities = ts.opportunity_starts.size();
  report.rewards.resize(n);
  report.won_values.resize(n);
  report.payments.resize(n);
  report.wins.assign(n, 0);
  for (std::size_t g = 0; g < n; ++g) {
    report.rewards[g] = group_reward(last_outcomes_, g, num_opportunities);
    report.won_values[g] = report.rewards[g] * static_cast<double>(num_opportunities);
    report.payments[g] = group_payment(last_outcomes_, g);
  }
  for (const auto& o : last_outcomes_)
    if (o.winner_group) {
      ++report.wins[*o.winner_group];
      report.payment += o.payment;
    }
  // Charge after all opportunities of the timestep: budgets may overshoot by
  // at most one timestep's payment.
  for (std::size_t g = 0; g < n; ++g) remaining_[g] -= report.payments[g];
  ++timestep_;
  report.terminal = done();
  return report;
}

std::vector<double> GroupedEnv::max_values() const { return episodes_[episode_].max_values; }

void GroupedEnv::set_budgets(std::vector<double> budgets) {
  if (budgets.size() != groups_.size()) throw DomainError("GroupedEnv: one budget per group required");
  for (double b : budgets)
    if (!(b >= 0.0)) throw DomainError("GroupedEnv: budgets must be non-negative");
  budgets_ = std::move(budgets);
  for (std::size_t g = 0; g < groups_.size(); ++g) groups_[g].initial_budget = budgets_[g];
  remaining_ = budgets_;
}

void GroupedEnv::force_manual(std::vector<bool> manual) {
  if (manual.size() != groups_.size()) throw DomainError("GroupedEnv: one flag per group required");
  forced_manual_ = std::move(manual);
}

std::unique_ptr<MultiAgentEnv> GroupedEnv::clone() const {
  auto copy = std::make_unique<GroupedEnv>(*this);
  copy->record_impressions(nullptr);
  return copy;
}

}  // namespace autobid
