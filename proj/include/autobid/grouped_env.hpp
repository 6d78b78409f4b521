#pragma once

#include <cstddef>
#include <vector>

#include "autobid/impression_log.hpp"
#include "autobid/meanfield.hpp"
#include "autobid/multi_agent_env.hpp"

namespace autobid {

// Replays an impression log with one mean agent per objective group. Each
// recalled ad bids mean_bid * clip(advantage); the highest eCPM among the
// recalled ads wins and pays the runner-up's eCPM. Budgets are kept per
// group and a group with a non-positive budget bids 0.
class GroupedEnv final : public MultiAgentEnv {
public:
  GroupedEnv(const ImpressionLog& log, std::vector<GroupSpec> groups);

  std::size_t num_agents() const override { return groups_.size(); }
  int episode_length() const override { return episode_length_; }
  std::vector<std::string> agent_labels() const override;

  void reset(std::uint64_t key) override;
  bool done() const override { return timestep_ >= episode_length_; }
  std::vector<Observation> observe() const override;
  StepReport step(std::span<const AgentBid> bids) override;
  std::vector<double> max_values() const override;

  const std::vector<double>& initial_budgets() const override { return budgets_; }
  std::vector<double> remaining_budgets() const override { return remaining_; }
  void set_budgets(std::vector<double> budgets) override;
  std::size_t episode_count() const override { return episodes_.size(); }

  std::unique_ptr<MultiAgentEnv> clone() const override;

  // Groups flagged here always bid their logged manual bids, whatever the
  // caller submits (opponents of a single trained group).
  void force_manual(std::vector<bool> manual);
  const std::vector<bool>& forced_manual() const noexcept { return forced_manual_; }

  const std::vector<GroupSpec>& groups() const noexcept { return groups_; }
  int current_episode_id() const;
  // Records of the current timestep (empty once done).
  std::span<const ImpressionRecord> current_records() const;
  std::vector<MeanAgentState> mean_agent_states() const;
  // Outcomes of the most recent step.
  const std::vector<OpportunityOutcome>& last_outcomes() const noexcept { return last_outcomes_; }

private:
  struct Timestep {
    std::vector<ImpressionRecord> records;  // sorted by opportunity then ad
    std::vector<std::size_t> opportunity_starts;
  };
  struct Episode {
    int id{0};
    std::vector<Timestep> timesteps;
    std::vector<double> max_values;
  };

  std::size_t group_index(Objective objective) const;

  std::vector<GroupSpec> groups_;
  std::vector<Episode> episodes_;
  int episode_length_{0};
  std::vector<double> budgets_;
  std::vector<double> remaining_;
  std::vector<bool> forced_manual_;
  std::size_t episode_{0};
  int timestep_{0};
  std::vector<OpportunityOutcome> last_outcomes_;
};

}  // namespace autobid
