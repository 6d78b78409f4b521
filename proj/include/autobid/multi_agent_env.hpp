#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "autobid/auction.hpp"

namespace autobid {

inline constexpr std::size_t kObservationDim = 3;

// Per-agent observation o_i^t = (B_i^t, v_i^t, ts_i^t), already scaled for
// the network: budget as a fraction of the initial budget, timesteps left as
// a fraction of the episode length, value unscaled.
struct Observation {
  double budget_fraction{0.0};
  double value{0.0};
  double time_fraction{0.0};
  // Reference manually-set bid (mean over the agent's records); only the
  // grouped environment fills it.
  double manual_bid{0.0};

  std::array<double, kObservationDim> features() const noexcept {
    return {budget_fraction, value, time_fraction};
  }
};

struct AgentBid {
  double amount{0.0};
  // Bid with the logged manually-set bids instead of `amount`.
  bool manual{false};
};

struct StepReport {
  // Reward r_i^t as the environment defines it (raw value for a single
  // impression, value won over |E_t| for a group).
  std::vector<double> rewards;
  // Total value won by each agent during the step.
  std::vector<double> won_values;
  std::vector<double> payments;
  // Impressions won by each agent during the step.
  std::vector<int> wins;
  // Bids as submitted after budget masking (mean bids for groups).
  std::vector<double> submitted_bids;
  // Platform revenue collected during the step.
  double payment{0.0};
  bool terminal{false};
};

// One auction as seen by the mechanism; recorded on request so revenue can be
// re-derived independently of the environment's own accounting.
struct ImpressionTrace {
  int step{0};
  std::vector<Bid> bids;
  std::vector<std::size_t> owners;  // agent/group owning each bid
  std::vector<double> values;
  double payment{0.0};
};

class MultiAgentEnv {
public:
  virtual ~MultiAgentEnv() = default;

  virtual std::size_t num_agents() const = 0;
  virtual int episode_length() const = 0;
  virtual std::vector<std::string> agent_labels() const = 0;

  // Start episode `key`. The single-impression environment derives a value
  // stream from it; log-backed environments select episode key mod count.
  virtual void reset(std::uint64_t key) = 0;
  virtual bool done() const = 0;
  virtual std::vector<Observation> observe() const = 0;
  virtual StepReport step(std::span<const AgentBid> bids) = 0;

  // V_i^max: total value agent i could capture in the current episode.
  virtual std::vector<double> max_values() const = 0;

  virtual const std::vector<double>& initial_budgets() const = 0;
  virtual std::vector<double> remaining_budgets() const = 0;
  virtual void set_budgets(std::vector<double> budgets) = 0;

  // Number of distinct episodes available (0 = unbounded stream).
  virtual std::size_t episode_count() const = 0;

  virtual std::unique_ptr<MultiAgentEnv> clone() const = 0;

  // When non-null, every auction run by step() is appended to `sink`.
  void record_impressions(std::vector<ImpressionTrace>* sink) noexcept { impressions_ = sink; }

protected:
  std::vector<ImpressionTrace>* impressions_{nullptr};
};

}  // namespace autobid
