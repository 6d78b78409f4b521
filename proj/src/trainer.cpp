#include "autobid/trainer.hpp"

#include <limits>
#include <numeric>

#include "autobid/checkpoint.hpp"
#include "autobid/environment.hpp"
#include "autobid/errors.hpp"
#include "autobid/grouped_env.hpp"
#include "autobid/meanfield.hpp"

namespace autobid {

double max_bid_prepass_payment(const MultiAgentEnv& env) {
  auto e = env.clone();
  const std::size_t n = e->num_agents();
  e->set_budgets(std::vector<double>(n, std::numeric_limits<double>::max()));
  const std::vector<AgentBid> bids(n, AgentBid{ActionGrid::kMax, false});
  const std::size_t episodes = std::max<std::size_t>(1, e->episode_count());
  double total = 0.0;
  for (std::size_t k = 0; k < episodes; ++k) {
    e->reset(k);
    while (!e->done()) total += e->step(bids).payment;
  }
  return total / static_cast<double>(episodes);
}

std::vector<double> compute_budgets(const MultiAgentEnv& env, double b0, std::span<const double> ratios) {
  if (!(b0 > 0.0)) throw ConfigError("compute_budgets: b0 must be positive");
  if (ratios.size() != env.num_agents())
    throw ConfigError("compute_budgets: " + std::to_string(env.num_agents()) + " ratios required, got " +
                      std::to_string(ratios.size()));
  for (double r : ratios)
    if (!(r >= 0.0)) throw ConfigError("compute_budgets: ratios must be >= 0");
  const double p = max_bid_prepass_payment(env);
  if (!(p > 0.0)) throw ConfigError("compute_budgets: the max-bid pre-pass collected no payment");
  std::vector<double> budgets(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) budgets[i] = p * b0 * ratios[i];
  return budgets;
}

std::vector<RosterEntry> roster_of(const AgentBundle& bundle) {
  std::vector<RosterEntry> roster(bundle.num_agents);
  for (std::size_t i = 0; i < roster.size(); ++i) roster[i] = {&bundle, i};
  return roster;
}

MetricsRow evaluate(std::span<const RosterEntry> roster, const MultiAgentEnv& env, int episodes,
                    EvalTrace* trace) {
  if (episodes < 1) throw DomainError("evaluate: episodes must be positive");
  auto e = env.clone();
  const std::size_t n = e->num_agents();
  if (roster.size() != n) throw DomainError("evaluate: one roster entry per agent required");
  if (trace) e->record_impressions(&trace->impressions);
  // Greedy selection never uses the draws; the stream only feeds the coin.
  Rng rng(0);

  MetricsRow row;
  row.groups = e->agent_labels();
  row.norm_values.assign(n, 0.0);
  row.raw_values.assign(n, 0.0);
  std::vector<AgentBid> bids(n);
  for (int ep = 0; ep < episodes; ++ep) {
    e->reset(static_cast<std::uint64_t>(ep));
    const auto vmax = e->max_values();
    std::vector<double> won(n, 0.0);
    int t = 0;
    while (!e->done()) {
      const auto obs = e->observe();
      for (std::size_t i = 0; i < n; ++i) {
        if (!roster[i].bundle) {
          bids[i] = {0.0, true};
          continue;
        }
        const auto a = act(*roster[i].bundle, obs[i], roster[i].slot, 0.0, rng, ActMode::Evaluation);
        bids[i] = {a.bid, a.manual};
      }
      const auto report = e->step(bids);
      row.revenue += report.payment;
      const auto remaining = e->remaining_budgets();
      for (std::size_t i = 0; i < n; ++i) {
        won[i] += report.won_values[i];
        if (trace)
          trace->steps.push_back({ep, t, i, report.submitted_bids[i], report.wins[i], report.payments[i],
                                  report.won_values[i], remaining[i]});
      }
      ++t;
    }
    for (std::size_t i = 0; i < n; ++i) {
      row.raw_values[i] += won[i];
      row.norm_values[i] += vmax[i] > 0.0 ? won[i] / vmax[i] : 0.0;
    }
  }
  const double k = static_cast<double>(episodes);
  row.revenue /= k;
  for (std::size_t i = 0; i < n; ++i) {
    row.raw_values[i] /= k;
    row.norm_values[i] /= k;
    row.social_welfare += row.norm_values[i];
  }
  return row;
}

MetricsRow evaluate(const AgentBundle& bundle, const MultiAgentEnv& env, int episodes, EvalTrace* trace) {
  const auto roster = roster_of(bundle);
  return evaluate(roster, env, episodes, trace);
}

TrainOptions TrainOptions::from(const ExperimentConfig& c) {
  TrainOptions o;
  o.gamma = c.gamma;
  o.max_steps = c.max_steps;
  o.eval_every = c.eval_every;
  o.eval_episodes = c.eval_episodes;
  o.target_sync = c.target_sync;
  o.batch_size = c.batch_size;
  o.reward_scale = c.reward_scale;
  o.normalize_rewards = c.normalize_rewards;
  o.bar_reward_scale = c.bar_reward_scale;
  return o;
}

TrainResult train(AgentBundle bundle, MultiAgentEnv& env, const MultiAgentEnv* eval_env,
                  const TrainOptions& options, std::uint64_t seed, const StepObserver& observer) {
  if (!bundle.kind.learns()) throw ConfigError(bundle.kind.name() + " does not learn");
  if (options.max_steps < 1 || options.eval_every < 1)
    throw ConfigError("train: max_steps and eval_every must be positive");
  if (options.target_sync < 1 || options.batch_size < 1)
    throw ConfigError("train: target_sync and batch_size must be positive");
  const std::size_t n_env = env.num_agents();
  std::vector<std::size_t> controlled = options.controlled;
  if (controlled.empty()) {
    controlled.resize(n_env);
    std::iota(controlled.begin(), controlled.end(), std::size_t{0});
  }
  for (std::size_t i : controlled)
    if (i >= n_env) throw DomainError("train: controlled agent out of range");
  if (bundle.num_agents != controlled.size())
    throw DomainError("train: bundle size differs from the number of controlled agents");
  const bool full_roster = controlled.size() == n_env;
  const std::size_t m = controlled.size();

  TrainResult result;
  result.bundle = std::move(bundle);
  AgentBundle& b = result.bundle;
  TrainCounters& c = result.counters;
  Rng act_rng = make_rng(seed, 101);
  Rng batch_rng = make_rng(seed, 102);

  auto emit = [&](std::int64_t label) {
    if (!eval_env || !full_roster) return;
    MetricsRow row = evaluate(b, *eval_env, options.eval_episodes);
    row.step = label;
    result.history.push_back(std::move(row));
  };

  std::vector<AgentAction> actions(m);
  std::vector<AgentBid> bids(n_env, AgentBid{0.0, true});
  std::vector<double> raw(m), submitted(m), bars(m);
  std::int64_t next_eval = options.eval_every;

  while (c.env_steps < options.max_steps) {
    env.reset(static_cast<std::uint64_t>(c.episodes));
    const auto vmax = env.max_values();
    EpisodeRecord record;
    record.id = static_cast<std::uint64_t>(c.episodes);
    record.transitions.reserve(static_cast<std::size_t>(env.episode_length()) * m);
    auto obs = env.observe();
    while (!env.done()) {
      const double eps = b.epsilon.value(c.env_steps);
      for (std::size_t k = 0; k < m; ++k) {
        actions[k] = act(b, obs[controlled[k]], k, eps, act_rng, ActMode::Training);
        bids[controlled[k]] = {actions[k].bid, false};
      }
      const StepReport report = env.step(bids);
      auto next = env.observe();
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = controlled[k];
        double r = report.rewards[i];
        if (options.normalize_rewards) r = vmax[i] > 0.0 ? report.won_values[i] / vmax[i] : 0.0;
        raw[k] = r * options.reward_scale;
        submitted[k] = report.submitted_bids[i];
        bars[k] = actions[k].bar.value_or(0.0);
      }
      const TrainingRewards rewards =
          training_reward(b.kind, raw, submitted, bars, report.payment * options.bar_reward_scale);
      for (std::size_t k = 0; k < m; ++k) {
        Transition t;
        t.obs = obs[controlled[k]].features();
        t.next_obs = next[controlled[k]].features();
        t.agent = static_cast<std::uint16_t>(k);
        t.action = static_cast<std::int16_t>(actions[k].bid_index);
        t.bar_action = static_cast<std::int16_t>(actions[k].bar_index);
        t.terminal = report.terminal;
        t.reward = rewards.bidder[k];
        t.bar_reward = rewards.bar.empty() ? 0.0 : rewards.bar[k];
        record.transitions.push_back(t);
      }
      if (observer) observer({c.env_steps, c.episodes, &actions, &submitted, &report, &rewards});
      obs = std::move(next);
      ++c.env_steps;
    }
    b.replay->insert(std::move(record));
    ++c.replay_insertions;

    if (const auto batch = sample_batch(*b.replay, options.batch_size, batch_rng)) {
      try {
        const auto y = td_targets(*batch, *b.bidder_target, options.gamma, Head::Bidder);
        train_step(*b.bidder, *batch, y, Head::Bidder);
        ++c.bidder_updates;
        if (b.bar) {
          const auto y_bar = td_targets(*batch, *b.bar_target, options.gamma, Head::Bar);
          for (int pass = 0; pass < 2; ++pass) {
            train_step(*b.bar, *batch, y_bar, Head::Bar);
            ++c.bar_updates;
          }
        }
      } catch (const TrainingError&) {
        if (options.diagnostic_checkpoint) save_checkpoint(*options.diagnostic_checkpoint, to_checkpoint(b));
        throw;
      }
      ++c.training_episodes;
      if (c.training_episodes % options.target_sync == 0) {
        sync_target(*b.bidder, *b.bidder_target);
        if (b.bar) sync_target(*b.bar, *b.bar_target);
        c.syncs.push_back(c.training_episodes);
      }
    }
    ++c.episodes;
    while (c.env_steps >= next_eval && next_eval < options.max_steps) {
      emit(next_eval);
      next_eval += options.eval_every;
    }
  }
  emit(options.max_steps);
  return result;
}

namespace {

ImpressionLog obtain_log(const std::optional<std::filesystem::path>& path,
                         const LogGeneratorConfig& generator, std::uint64_t seed) {
  if (path) return read_log(*path);
  return generate_log(generator, seed);
}

AgentOptions agent_options(const ExperimentConfig& c) {
  AgentOptions o;
  o.optimizer = c.optimizer;
  o.hidden = c.hidden;
  o.replay_capacity = c.buffer_capacity;
  o.epsilon = c.epsilon;
  return o;
}

}  // namespace

Environments build_environments(const ExperimentConfig& config) {
  config.validate();
  Environments envs;
  if (config.env == EnvKind::TwoAgent) {
    EpisodeConfig ec;
    ec.num_agents = config.num_agents;
    ec.episode_length = config.episode_length;
    ec.budgets.assign(config.num_agents, 0.0);
    ec.value_source = GaussianValues{config.value_mean, config.value_variance};
    ec.seed = config.data_seed;
    envs.train = std::make_unique<SingleImpressionEnv>(ec);
    ec.seed = config.eval_seed;
    envs.test = std::make_unique<SingleImpressionEnv>(ec);
  } else {
    envs.train_log = obtain_log(config.train_log, config.train_log_generator, split_seed(config.data_seed, 1));
    const ImpressionLog test_log =
        obtain_log(config.test_log, config.test_log_generator, split_seed(config.data_seed, 2));
    auto train_groups = group_by_objective(envs.train_log);
    auto test_groups = group_by_objective(test_log);
    if (train_groups.size() != test_groups.size())
      throw ConfigError("train and test logs carry different objective groups");
    for (std::size_t g = 0; g < train_groups.size(); ++g)
      if (train_groups[g].objective != test_groups[g].objective)
        throw ConfigError("train and test logs carry different objective groups");
    envs.train = std::make_unique<GroupedEnv>(envs.train_log, std::move(train_groups));
    envs.test = std::make_unique<GroupedEnv>(test_log, std::move(test_groups));
  }
  envs.budgets = compute_budgets(*envs.train, config.b0, config.ratios);
  envs.prepass_payment = max_bid_prepass_payment(*envs.train);
  envs.train->set_budgets(envs.budgets);
  envs.test->set_budgets(envs.budgets);
  return envs;
}

RunResult run_experiment(const ExperimentConfig& config, std::uint64_t seed, const StepObserver& observer) {
  const Environments envs = build_environments(config);
  return run_experiment(config, envs, seed, observer);
}

RunResult run_experiment(const ExperimentConfig& config, const Environments& envs, std::uint64_t seed,
                         const StepObserver& observer) {
  config.validate();
  const std::size_t n = envs.train->num_agents();
  const TrainOptions options = TrainOptions::from(config);
  const AgentOptions agent_opts = agent_options(config);
  RunResult run;

  switch (config.method.method) {
    case Method::MSB: {
      Rng rng = make_rng(seed, 0);
      run.bundles.push_back(AgentBundle::create(config.method, n, rng, agent_opts));
      MetricsRow row = evaluate(run.bundles.front(), *envs.test, config.eval_episodes);
      row.step = config.max_steps;
      run.history.push_back(std::move(row));
      break;
    }
    case Method::DQNS: {
      const auto* grouped = dynamic_cast<const GroupedEnv*>(envs.train.get());
      if (!grouped) throw ConfigError("DQN-S needs the grouped_log environment");
      for (std::size_t g = 0; g < n; ++g) {
        const std::uint64_t group_seed = split_seed(seed, 1000 + g);
        Rng rng = make_rng(group_seed, 0);
        auto env_g = grouped->clone();
        std::vector<bool> manual(n, true);
        manual[g] = false;
        static_cast<GroupedEnv&>(*env_g).force_manual(std::move(manual));
        TrainOptions opts = options;
        opts.controlled = {g};
        auto trained = train(AgentBundle::create(config.method, 1, rng, agent_opts), *env_g, nullptr, opts,
                             group_seed, observer);
        run.bundles.push_back(std::move(trained.bundle));
        run.counters.env_steps += trained.counters.env_steps;
        run.counters.episodes += trained.counters.episodes;
        run.counters.replay_insertions += trained.counters.replay_insertions;
        run.counters.training_episodes += trained.counters.training_episodes;
        run.counters.bidder_updates += trained.counters.bidder_updates;
      }
      std::vector<RosterEntry> roster(n);
      for (std::size_t g = 0; g < n; ++g) roster[g] = {&run.bundles[g], 0};
      MetricsRow row = evaluate(roster, *envs.test, config.eval_episodes);
      row.step = config.max_steps;
      run.history.push_back(std::move(row));
      break;
    }
    default: {
      Rng rng = make_rng(seed, 0);
      auto env = envs.train->clone();
      auto trained = train(AgentBundle::create(config.method, n, rng, agent_opts), *env, envs.test.get(),
                           options, seed, observer);
      run.bundles.push_back(std::move(trained.bundle));
      run.history = std::move(trained.history);
      run.counters = std::move(trained.counters);
      break;
    }
  }
  for (auto& row : run.history) {
    row.run_id = config.run_id;
    row.seed = seed;
  }
  return run;
}

}  // namespace autobid
