#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autobid/agents.hpp"
#include "autobid/impression_log.hpp"
#include "autobid/learner.hpp"

namespace autobid {

enum class EnvKind { TwoAgent, GroupedLog };

std::string to_string(EnvKind kind);
std::optional<EnvKind> parse_env_kind(std::string_view text);

struct ExperimentConfig {
  std::string run_id{"run"};
  AgentKind method{};
  EnvKind env{EnvKind::TwoAgent};

  // Two-agent environment.
  std::size_t num_agents{2};
  int episode_length{100};
  double value_mean{0.5};
  double value_variance{1.0};

  // Budgets: B_i = P * b0 * ratios[i], P from a max-bid pre-pass.
  double b0{1.0};
  std::vector<double> ratios{0.5, 0.5};

  // Learning.
  double gamma{0.99};
  std::int64_t max_steps{500000};
  std::int64_t eval_every{10000};
  int eval_episodes{5};
  int target_sync{200};
  std::size_t batch_size{32};
  std::size_t buffer_capacity{5000};
  RmsPropOptions optimizer{};
  EpsilonSchedule epsilon{};
  std::vector<int> hidden{kQNetHidden};

  // Bidder rewards are multiplied by reward_scale; with normalize_rewards the
  // won value is first divided by the episode's V_i^max.
  double reward_scale{1.0};
  bool normalize_rewards{false};
  double bar_reward_scale{1.0};

  std::vector<std::uint64_t> seeds{1};
  // Seeds of the environment data (value streams, generated logs); fixed
  // across run seeds so runs differ only in initialisation and exploration.
  std::uint64_t data_seed{2024};
  std::uint64_t eval_seed{7};

  // Grouped-log environment: logs are read from the paths when given and
  // generated otherwise.
  std::optional<std::filesystem::path> train_log;
  std::optional<std::filesystem::path> test_log;
  LogGeneratorConfig train_log_generator{};
  LogGeneratorConfig test_log_generator{};

  // Throws ConfigError.
  void validate() const;

  // Desk-scale presets.
  static ExperimentConfig two_agent(const AgentKind& kind, double b0, double ratio);
  static ExperimentConfig grouped(const AgentKind& kind, double b0, std::vector<double> ratios);
};

// Fill `config` from a JSON object; keys absent from the object keep their
// current values. Unknown keys and malformed JSON are a ConfigError.
void apply_json(ExperimentConfig& config, std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults = {});
std::string to_json(const ExperimentConfig& config);

}  // namespace autobid
