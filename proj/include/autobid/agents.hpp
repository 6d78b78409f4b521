#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autobid/grouped_env.hpp"
#include "autobid/learner.hpp"
#include "autobid/rewards.hpp"

namespace autobid {

enum class Method { MSB, DQNS, CMIL, COIL, MIXIL, MAAB, MAABFix };

struct AgentKind {
  Method method{Method::CMIL};
  double temperature{4.0};  // MIXIL, MAAB, MAABFix
  double fixed_bar{0.0};    // MAABFix

  static AgentKind msb() { return {Method::MSB}; }
  static AgentKind dqns() { return {Method::DQNS}; }
  static AgentKind cmil() { return {Method::CMIL}; }
  static AgentKind coil() { return {Method::COIL}; }
  static AgentKind mixil(double tau) { return {Method::MIXIL, tau}; }
  static AgentKind maab(double tau) { return {Method::MAAB, tau}; }
  static AgentKind maab_fix(double tau, double bar) { return {Method::MAABFix, tau, bar}; }

  bool learns() const noexcept { return method != Method::MSB; }
  bool has_bar_net() const noexcept { return method == Method::MAAB; }
  bool gated() const noexcept { return method == Method::MAAB || method == Method::MAABFix; }

  // Throws ConfigError on tau <= 0 (where used) or a fixed bar outside [0, 5].
  void validate() const;
  // "MSB", "DQN-S", "CM-IL", "CO-IL", "MIX-IL", "MAAB", "MAAB-fix".
  std::string name() const;
  // Name plus parameters, e.g. "MIX-IL(tau=2)"; used as a run label.
  std::string label() const;
};

// Accepts the names produced by AgentKind::name() (case-insensitive, with
// or without the dash). Parameters are taken from the arguments.
std::optional<Method> parse_method(std::string_view name);

RewardMode reward_mode(const AgentKind& kind);

struct AgentOptions {
  RmsPropOptions optimizer{};
  std::vector<int> hidden{kQNetHidden};
  std::size_t replay_capacity{5000};
  EpsilonSchedule epsilon{};
  // Start from all-zero parameters instead of the uniform initialisation.
  bool zero_init{false};
};

// Policy state for one method. Bidders share one network and bar agents
// share another, each with one-hot agent ids.
struct AgentBundle {
  AgentKind kind;
  std::size_t num_agents{0};
  std::optional<QNet> bidder;
  std::optional<QNet> bidder_target;
  std::optional<QNet> bar;
  std::optional<QNet> bar_target;
  std::shared_ptr<ReplayBuffer> replay;
  EpsilonSchedule epsilon;

  static AgentBundle create(const AgentKind& kind, std::size_t num_agents, Rng& rng,
                            const AgentOptions& options = {});
};

struct AgentAction {
  double bid{0.0};
  std::optional<double> bar;
  bool manual{false};
  int bid_index{0};
  int bar_index{0};
};

enum class ActMode { Training, Evaluation };

// MSB bids the observation's manual bid; learned kinds pick a grid bid
// epsilon-greedily. In training, MAAB also picks a bar from the bar network
// and MAAB-fix reports its fixed bar. Evaluation never consults bars.
AgentAction act(const AgentBundle& bundle, const Observation& obs, std::size_t agent,
                double epsilon, Rng& rng, ActMode mode = ActMode::Training);

struct TrainingRewards {
  std::vector<double> bidder;
  std::vector<double> bar;  // empty for kinds without bars
};

// Bar-gate split applied to already credited rewards:
// bidder_i = z_i * credited_i, bar_i = z_i * payment, z_i = [bid_i >= bar_i].
TrainingRewards gate_rewards(std::span<const double> credited, std::span<const double> bids,
                             std::span<const double> bars, double payment);

// Rewards used to train bidders (and bar agents) from the environment's raw
// rewards: individual (MSB, DQN-S, CM-IL), total (CO-IL), softmax credit
// (MIX-IL), gated softmax credit and gated payment (MAAB, MAAB-fix).
TrainingRewards training_reward(const AgentKind& kind, std::span<const double> raw_rewards,
                                std::span<const double> bids, std::span<const double> bars,
                                double payment);

// Environment in which only `trained_group` follows its policy and every
// other group bids its logged manual bids.
GroupedEnv dqns_training_env(const ImpressionLog& log, std::vector<GroupSpec> groups,
                             std::size_t trained_group);

}  // namespace autobid
