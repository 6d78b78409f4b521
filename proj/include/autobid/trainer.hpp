#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "autobid/agents.hpp"
#include "autobid/config.hpp"
#include "autobid/multi_agent_env.hpp"

namespace autobid {

struct MetricsRow {
  std::string run_id;
  std::uint64_t seed{0};
  std::int64_t step{0};
  std::vector<std::string> groups;
  // Per-group V_i / V_i^max, averaged over evaluation episodes.
  std::vector<double> norm_values;
  // Per-group won value V_i, averaged over evaluation episodes.
  std::vector<double> raw_values;
  double social_welfare{0.0};  // sum of norm_values
  double revenue{0.0};         // payments per episode, averaged
};

// Total platform payment of one pre-pass over every episode the environment
// offers (one episode for streamed environments) in which every agent bids
// the top of the grid with unlimited budget; averaged over episodes.
double max_bid_prepass_payment(const MultiAgentEnv& env);

// B_i = P * b0 * ratios[i]. Throws ConfigError on b0 <= 0, a negative ratio,
// a ratio count different from the agent count, or P = 0.
std::vector<double> compute_budgets(const MultiAgentEnv& env, double b0,
                                    std::span<const double> ratios);

// Which policy drives each environment agent at evaluation time.
struct RosterEntry {
  const AgentBundle* bundle{nullptr};
  std::size_t slot{0};
};

std::vector<RosterEntry> roster_of(const AgentBundle& bundle);

struct EvalStep {
  int episode{0};
  int step{0};
  std::size_t agent{0};
  double bid{0.0};
  int wins{0};
  double payment{0.0};
  double value{0.0};
  double remaining_budget{0.0};
};

struct EvalTrace {
  std::vector<EvalStep> steps;
  std::vector<ImpressionTrace> impressions;
};

// Greedy evaluation with bar agents removed over episodes 0..episodes-1 of a
// copy of `env`. Neither the bundles nor `env` are modified.
MetricsRow evaluate(std::span<const RosterEntry> roster, const MultiAgentEnv& env, int episodes = 5,
                    EvalTrace* trace = nullptr);
MetricsRow evaluate(const AgentBundle& bundle, const MultiAgentEnv& env, int episodes = 5,
                    EvalTrace* trace = nullptr);

struct TrainOptions {
  double gamma{0.99};
  std::int64_t max_steps{500000};
  std::int64_t eval_every{10000};
  int eval_episodes{5};
  int target_sync{200};
  std::size_t batch_size{32};
  double reward_scale{1.0};
  bool normalize_rewards{false};
  double bar_reward_scale{1.0};
  // Environment agents driven by the bundle (bundle slot = position); every
  // other agent bids manually. Empty means all agents, slot = agent index.
  std::vector<std::size_t> controlled;
  // Written when training aborts on a non-finite loss.
  std::optional<std::filesystem::path> diagnostic_checkpoint;

  static TrainOptions from(const ExperimentConfig& config);
};

struct TrainCounters {
  std::int64_t env_steps{0};
  std::int64_t episodes{0};
  std::int64_t replay_insertions{0};
  std::int64_t training_episodes{0};  // episodes followed by an update
  std::int64_t bidder_updates{0};
  std::int64_t bar_updates{0};
  // training_episodes value at each target synchronisation.
  std::vector<std::int64_t> syncs;
};

struct TrainingStep {
  std::int64_t global_step{0};
  std::int64_t episode{0};
  const std::vector<AgentAction>* actions{nullptr};
  const std::vector<double>* bids{nullptr};  // submitted, per controlled agent
  const StepReport* report{nullptr};
  const TrainingRewards* rewards{nullptr};
};

using StepObserver = std::function<void(const TrainingStep&)>;

struct TrainResult {
  AgentBundle bundle;
  std::vector<MetricsRow> history;
  TrainCounters counters;
};

// Training loop: per step every controlled agent picks a bid (and a bar)
// epsilon-greedily, the environment runs its auctions, and rewards are
// credited per the bundle's kind. Per episode the transitions go to replay,
// one batch is sampled, the bidder network is updated once and the bar
// network twice, and targets are synchronised every target_sync updates.
// With eval_env set, a MetricsRow is produced each time the global step
// count passes a multiple of eval_every (checked at episode ends) and at the
// end. Throws TrainingError on a non-finite loss.
TrainResult train(AgentBundle bundle, MultiAgentEnv& env, const MultiAgentEnv* eval_env,
                  const TrainOptions& options, std::uint64_t seed, const StepObserver& observer = {});

struct Environments {
  std::unique_ptr<MultiAgentEnv> train;
  std::unique_ptr<MultiAgentEnv> test;
  ImpressionLog train_log;  // grouped environment only
  std::vector<double> budgets;
  double prepass_payment{0.0};
};

// Builds (or reads) the environments of `config` and applies its budgets.
Environments build_environments(const ExperimentConfig& config);

struct RunResult {
  std::vector<MetricsRow> history;
  std::vector<AgentBundle> bundles;  // one per group for DQN-S
  TrainCounters counters;
};

// One seed of an experiment: MSB is evaluated only, DQN-S trains one
// single-agent policy per group against manual bids and is evaluated once at
// the end, every other kind trains all agents jointly.
RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                         const StepObserver& observer = {});
RunResult run_experiment(const ExperimentConfig& config, const Environments& envs,
                         std::uint64_t seed, const StepObserver& observer = {});

}  // namespace autobid
