#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "autobid/auction.hpp"
#include "autobid/multi_agent_env.hpp"
#include "autobid/rng.hpp"

namespace autobid {

inline constexpr int kTwoAgentEpisodeLength = 100;

struct GaussianValues {
  double mean{0.5};
  double variance{1.0};
};

// Per-step, per-agent values replayed from a table; rows wrap around.
struct LoggedValues {
  std::vector<std::vector<double>> rows;
};

using ValueSource = std::variant<GaussianValues, LoggedValues>;

struct EpisodeConfig {
  std::size_t num_agents{2};
  int episode_length{kTwoAgentEpisodeLength};
  std::vector<double> budgets;
  ValueSource value_source{GaussianValues{}};
  std::uint64_t seed{0};

  void validate() const;
};

struct EnvState {
  std::vector<double> initial_budgets;
  std::vector<double> remaining_budgets;
  std::vector<double> current_values;
  int timesteps_left{0};
  int step_index{0};
  int episode_length{0};

  bool terminal() const noexcept { return timesteps_left <= 0; }
};

// Draw from Normal(mean, variance) clipped below at 0.
double sample_value(Rng& rng, double mean, double variance);

// Rectified-Gaussian mean E[max(X, 0)] for X ~ Normal(mean, variance).
double clipped_normal_mean(double mean, double variance);

double draw_value(const ValueSource& source, Rng& rng, int step, std::size_t agent);

EnvState initial_state(const EpisodeConfig& config, Rng& rng);

// One impression: mask bids by budget, run the auction on the current values,
// charge the winner, draw the next values, advance the clock.
// Throws StateError on a terminated episode.
std::pair<EnvState, AuctionOutcome> step(const EnvState& state, std::span<const Bid> joint_bids,
                                         const ValueSource& source, Rng& rng);

// Observations for every agent in `state`.
std::vector<Observation> observe(const EnvState& state);

// n agents competing for one impression per step with independently drawn
// values (the motivating two-agent setting).
class SingleImpressionEnv final : public MultiAgentEnv {
public:
  explicit SingleImpressionEnv(EpisodeConfig config);

  std::size_t num_agents() const override { return config_.num_agents; }
  int episode_length() const override { return config_.episode_length; }
  std::vector<std::string> agent_labels() const override;

  void reset(std::uint64_t key) override;
  bool done() const override { return state_.terminal(); }
  std::vector<Observation> observe() const override;
  StepReport step(std::span<const AgentBid> bids) override;
  std::vector<double> max_values() const override { return max_values_; }

  const std::vector<double>& initial_budgets() const override { return config_.budgets; }
  std::vector<double> remaining_budgets() const override { return state_.remaining_budgets; }
  void set_budgets(std::vector<double> budgets) override;
  std::size_t episode_count() const override { return 0; }

  std::unique_ptr<MultiAgentEnv> clone() const override;

  const EnvState& state() const noexcept { return state_; }
  const EpisodeConfig& config() const noexcept { return config_; }

private:
  EpisodeConfig config_;
  EnvState state_;
  Rng rng_;
  ValueSource episode_values_;
  std::vector<double> max_values_;
};

}  // namespace autobid
