#include "autobid/environment.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "autobid/errors.hpp"

namespace autobid {

void EpisodeConfig::validate() const {
  if (num_agents == 0) throw DomainError("EpisodeConfig: num_agents must be positive");
  if (episode_length < 1) throw DomainError("EpisodeConfig: episode_length must be >= 1");
  if (budgets.size() != num_agents)
    throw DomainError("EpisodeConfig: one budget per agent required");
  for (double b : budgets)
    if (!std::isfinite(b) || b < 0.0)
      throw DomainError("EpisodeConfig: budgets must be finite and non-negative");
  if (const auto* g = std::get_if<GaussianValues>(&value_source)) {
    if (!(g->variance >= 0.0)) throw DomainError("EpisodeConfig: variance must be >= 0");
  } else {
    const auto& rows = std::get<LoggedValues>(value_source).rows;
    if (rows.empty()) throw DomainError("EpisodeConfig: empty value log");
    for (const auto& row : rows)
      if (row.size() != num_agents)
        throw DomainError("EpisodeConfig: value log row width differs from num_agents");
  }
}

double sample_value(Rng& rng, double mean, double variance) {
  if (!(variance >= 0.0)) throw DomainError("sample_value: variance must be >= 0");
  double x = mean;
  if (variance > 0.0) {
    std::normal_distribution<double> normal(mean, std::sqrt(variance));
    x = normal(rng);
  }
  return x > 0.0 ? x : 0.0;
}

double clipped_normal_mean(double mean, double variance) {
  if (variance <= 0.0) return mean > 0.0 ? mean : 0.0;
  const double sd = std::sqrt(variance);
  const double z = mean / sd;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  return mean * cdf + sd * pdf;
}

double draw_value(const ValueSource& source, Rng& rng, int step, std::size_t agent) {
  if (const auto* g = std::get_if<GaussianValues>(&source))
    return sample_value(rng, g->mean, g->variance);
  const auto& rows = std::get<LoggedValues>(source).rows;
  return rows[static_cast<std::size_t>(step) % rows.size()][agent];
}

EnvState initial_state(const EpisodeConfig& config, Rng& rng) {
  config.validate();
  EnvState s;
  s.initial_budgets = config.budgets;
  s.remaining_budgets = config.budgets;
  s.current_values.resize(config.num_agents);
  for (std::size_t i = 0; i < config.num_agents; ++i)
    s.current_values[i] = draw_value(config.value_source, rng, 0, i);
  s.timesteps_left = config.episode_length;
  s.step_index = 0;
  s.episode_length = config.episode_length;
  return s;
}

std::pair<EnvState, AuctionOutcome> step(const EnvState& state, std::span<const Bid> joint_bids,
                                         const ValueSource& source, Rng& rng) {
  if (state.terminal()) throw StateError("step: episode already terminated");
  if (joint_bids.size() != state.remaining_budgets.size())
    throw DomainError("step: one bid per agent required");

  std::vector<Bid> masked(joint_bids.begin(), joint_bids.end());
  for (auto& b : masked) b = mask_bid(b, state.remaining_budgets.at(b.agent_id));

  AuctionOutcome outcome = run_auction(masked, state.current_values);

  EnvState next = state;
  if (outcome.winner) next.remaining_budgets[masked[*outcome.winner].agent_id] -= outcome.payment;
  next.step_index = state.step_index + 1;
  next.timesteps_left = state.timesteps_left - 1;
  if (!next.terminal())
    for (std::size_t i = 0; i < next.current_values.size(); ++i)
      next.current_values[i] = draw_value(source, rng, next.step_index, i);
  return {std::move(next), std::move(outcome)};
}

std::vector<Observation> observe(const EnvState& state) {
  std::vector<Observation> obs(state.remaining_budgets.size());
  const double T = static_cast<double>(state.episode_length);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double b0 = state.initial_budgets[i];
    obs[i].budget_fraction = b0 > 0.0 ? state.remaining_budgets[i] / b0 : 0.0;
    obs[i].value = state.current_values[i];
    obs[i].time_fraction = static_cast<double>(state.timesteps_left) / T;
  }
  return obs;
}

SingleImpressionEnv::SingleImpressionEnv(EpisodeConfig config) : config_(std::move(config)) {
  config_.validate();
  reset(0);
}

std::vector<std::string> SingleImpressionEnv::agent_labels() const {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < config_.num_agents; ++i)
    labels.push_back("agent" + std::to_string(i + 1));
  return labels;
}

void SingleImpressionEnv::reset(std::uint64_t key) {
  // The whole episode is drawn up front so V^max is known before stepping.
  rng_ = make_rng(config_.seed, key);
  const auto T = static_cast<std::size_t>(config_.episode_length);
  LoggedValues table;
  table.rows.assign(T, std::vector<double>(config_.num_agents));
  max_values_.assign(config_.num_agents, 0.0);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t i = 0; i < config_.num_agents; ++i) {
      const double v = draw_value(config_.value_source, rng_, static_cast<int>(t), i);
      table.rows[t][i] = v;
      max_values_[i] += v;
    }
  EpisodeConfig episode = config_;
  episode.value_source = std::move(table);
  state_ = initial_state(episode, rng_);
  episode_values_ = std::move(episode.value_source);
}

std::vector<Observation> SingleImpressionEnv::observe() const { return autobid::observe(state_); }

StepReport SingleImpressionEnv::step(std::span<const AgentBid> bids) {
  const std::size_t n = config_.num_agents;
  if (bids.size() != n) throw DomainError("SingleImpressionEnv::step: one bid per agent required");
  std::vector<Bid> joint(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bids[i].manual)
      throw DomainError("SingleImpressionEnv: no manually-set bids in this environment");
    joint[i] = Bid{i, bids[i].amount, 1.0};
  }
  const int t = state_.step_index;
  const std::vector<double> values = state_.current_values;
  auto [next, outcome] = autobid::step(state_, joint, episode_values_, rng_);

  StepReport report;
  report.rewards = outcome.raw_rewards;
  report.won_values = outcome.raw_rewards;
  report.payments.assign(n, 0.0);
  report.wins = outcome.win_flags;
  report.submitted_bids.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    report.submitted_bids[i] = mask_bid(joint[i], state_.remaining_budgets[i]).amount;
  if (outcome.winner) report.payments[*outcome.winner] = outcome.payment;
  report.payment = outcome.payment;
  if (impressions_) {
    ImpressionTrace trace;
    trace.step = t;
    for (std::size_t i = 0; i < n; ++i) {
      trace.bids.push_back(Bid{i, report.submitted_bids[i], 1.0});
      trace.owners.push_back(i);
    }
    trace.values = values;
    trace.payment = outcome.payment;
    impressions_->push_back(std::move(trace));
  }
  state_ = std::move(next);
  report.terminal = state_.terminal();
  return report;
}

void SingleImpressionEnv::set_budgets(std::vector<double> budgets) {
  config_.budgets = std::move(budgets);
  config_.validate();
  state_.initial_budgets = config_.budgets;
  state_.remaining_budgets = config_.budgets;
}

std::unique_ptr<MultiAgentEnv> SingleImpressionEnv::clone() const {
  auto copy = std::make_unique<SingleImpressionEnv>(*this);
  copy->record_impressions(nullptr);
  return copy;
}

}  // namespace autobid
