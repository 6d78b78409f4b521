#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autobid/checkpoint.hpp"
#include "autobid/config.hpp"
#include "autobid/errors.hpp"
#include "autobid/grid.hpp"
#include "autobid/impression_log.hpp"
#include "autobid/report.hpp"
#include "autobid/trainer.hpp"

namespace fs = std::filesystem;
using namespace autobid;

namespace {

// Flags mirroring ExperimentConfig; only the ones given override the file.
struct ConfigFlags {
  std::optional<std::string> config_file;
  std::optional<std::string> run_id;
  std::optional<std::string> method;
  std::optional<double> tau;
  std::optional<double> fixed_bar;
  std::optional<std::string> env;
  std::optional<double> b0;
  std::optional<std::vector<double>> ratios;
  std::optional<double> gamma;
  std::optional<std::int64_t> max_steps;
  std::optional<std::int64_t> eval_every;
  std::optional<int> eval_episodes;
  std::optional<int> target_sync;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> buffer_capacity;
  std::optional<double> learning_rate;
  std::optional<double> reward_scale;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::uint64_t> data_seed;
  std::optional<std::uint64_t> eval_seed;
  std::optional<std::string> train_log;
  std::optional<std::string> test_log;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "JSON configuration file supplying defaults");
    app->add_option("--run-id", run_id);
    app->add_option("--method", method, "MSB, DQN-S, CM-IL, CO-IL, MIX-IL, MAAB, MAAB-fix");
    app->add_option("--tau", tau, "TRCA temperature");
    app->add_option("--fixed-bar", fixed_bar, "bar of MAAB-fix");
    app->add_option("--env", env, "two_agent or grouped_log");
    app->add_option("--b0", b0, "budget level B_0");
    app->add_option("--ratios", ratios, "per-agent budget ratios");
    app->add_option("--gamma", gamma);
    app->add_option("--max-steps", max_steps);
    app->add_option("--eval-every", eval_every);
    app->add_option("--eval-episodes", eval_episodes);
    app->add_option("--target-sync", target_sync);
    app->add_option("--batch-size", batch_size);
    app->add_option("--buffer-capacity", buffer_capacity);
    app->add_option("--lr", learning_rate);
    app->add_option("--reward-scale", reward_scale);
    app->add_option("--seeds", seeds);
    app->add_option("--data-seed", data_seed);
    app->add_option("--eval-seed", eval_seed);
    app->add_option("--train-log", train_log, "impression log CSV for training");
    app->add_option("--test-log", test_log, "impression log CSV for evaluation");
  }

  ExperimentConfig resolve() const {
    // The environment decides the preset that file and flags refine.
    ExperimentConfig c;
    EnvKind kind = EnvKind::TwoAgent;
    if (env) {
      const auto parsed = parse_env_kind(*env);
      if (!parsed) throw ConfigError("unknown env '" + *env + "'");
      kind = *parsed;
    } else if (config_file) {
      kind = load_config(*config_file).env;
    }
    c = kind == EnvKind::TwoAgent ? ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.5)
                                  : ExperimentConfig::grouped(AgentKind::cmil(), 0.25, {1.0, 1.0, 1.0});
    if (config_file) c = load_config(*config_file, c);
    if (run_id) c.run_id = *run_id;
    if (method) {
      const auto m = parse_method(*method);
      if (!m) throw ConfigError("unknown method '" + *method + "'");
      c.method.method = *m;
    }
    if (tau) c.method.temperature = *tau;
    if (fixed_bar) c.method.fixed_bar = *fixed_bar;
    if ((method || tau || fixed_bar) && !run_id) c.run_id = c.method.label();
    c.env = kind;
    if (b0) c.b0 = *b0;
    if (ratios) c.ratios = *ratios;
    if (c.env == EnvKind::TwoAgent) c.num_agents = c.ratios.size();
    if (gamma) c.gamma = *gamma;
    if (max_steps) c.max_steps = *max_steps;
    if (eval_every) c.eval_every = *eval_every;
    if (eval_episodes) c.eval_episodes = *eval_episodes;
    if (target_sync) c.target_sync = *target_sync;
    if (batch_size) c.batch_size = *batch_size;
    if (buffer_capacity) c.buffer_capacity = *buffer_capacity;
    if (learning_rate) c.optimizer.learning_rate = *learning_rate;
    if (reward_scale) c.reward_scale = *reward_scale;
    if (seeds) c.seeds = *seeds;
    if (data_seed) c.data_seed = *data_seed;
    if (eval_seed) c.eval_seed = *eval_seed;
    if (train_log) c.train_log = *train_log;
    if (test_log) c.test_log = *test_log;
    c.validate();
    return c;
  }
};

void print_row(const MetricsRow& row) {
  std::printf("%s seed=%llu step=%lld social_welfare=%.4f revenue=%.4f", row.run_id.c_str(),
              static_cast<unsigned long long>(row.seed), static_cast<long long>(row.step), row.social_welfare,
              row.revenue);
  for (std::size_t g = 0; g < row.groups.size(); ++g)
    std::printf(" %s=%.4f", row.groups[g].c_str(), row.norm_values[g]);
  std::printf("\n");
  std::fflush(stdout);
}

int cmd_gen_logs(const std::string& out, LogGeneratorConfig g, std::uint64_t seed) {
  write_log(fs::path(out), generate_log(g, seed));
  return 0;
}

int cmd_train(const ConfigFlags& flags, const std::string& out_dir) {
  const ExperimentConfig config = flags.resolve();
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    std::FILE* f = std::fopen((dir / "config.json").string().c_str(), "w");
    if (f) {
      std::fputs(to_json(config).c_str(), f);
      std::fclose(f);
    }
  }
  const Environments envs = build_environments(config);
  std::vector<MetricsRow> history;
  for (std::uint64_t seed : config.seeds) {
    const RunResult run = run_experiment(config, envs, seed);
    for (const auto& row : run.history) print_row(row);
    history.insert(history.end(), run.history.begin(), run.history.end());
    for (std::size_t k = 0; k < run.bundles.size(); ++k) {
      if (!run.bundles[k].kind.learns()) continue;
      std::string name = "checkpoint_seed" + std::to_string(seed);
      if (run.bundles.size() > 1) name += "_group" + std::to_string(k);
      save_checkpoint(dir / (name + ".txt"), to_checkpoint(run.bundles[k]));
    }
  }
  const auto records = to_records(history);
  write_metrics(dir / "metrics.csv", records);
  const auto agg = aggregate(records);
  write_aggregate(dir / "aggregate.csv", agg);
  return 0;
}

int cmd_evaluate(const ConfigFlags& flags, const std::vector<std::string>& checkpoints, int episodes,
                 const std::string& out, const std::string& trace_path) {
  const ExperimentConfig config = flags.resolve();
  const Environments envs = build_environments(config);
  std::vector<AgentBundle> bundles;
  for (const auto& path : checkpoints) bundles.push_back(bundle_from_checkpoint(load_checkpoint(path)));
  std::vector<RosterEntry> roster;
  if (bundles.size() == 1 && bundles[0].num_agents == envs.test->num_agents()) {
    roster = roster_of(bundles[0]);
  } else if (bundles.size() == envs.test->num_agents()) {
    for (const auto& b : bundles) {
      if (b.num_agents != 1) throw ConfigError("per-agent checkpoints must hold one agent each");
      roster.push_back({&b, 0});
    }
  } else {
    throw ConfigError("checkpoints do not cover the environment's agents");
  }
  EvalTrace trace;
  MetricsRow row = evaluate(roster, *envs.test, episodes, trace_path.empty() ? nullptr : &trace);
  row.run_id = config.run_id;
  row.step = 0;
  print_row(row);
  if (!out.empty()) write_metrics(fs::path(out), to_records(row));
  if (!trace_path.empty()) write_trace(fs::path(trace_path), trace, envs.test->episode_length());
  return 0;
}

int cmd_grid(const ConfigFlags& flags, std::vector<double> b0s, std::vector<double> ratios,
             const std::vector<std::string>& methods, double tau, int episodes, unsigned jobs,
             const std::string& out) {
  GridConfig grid;
  grid.base = flags.resolve();
  if (grid.base.env != EnvKind::TwoAgent) throw ConfigError("grid runs the two_agent environment");
  if (!b0s.empty()) grid.b0s = std::move(b0s);
  if (!ratios.empty()) grid.ratios = std::move(ratios);
  if (!methods.empty()) {
    grid.methods.clear();
    for (const auto& name : methods) {
      const auto m = parse_method(name);
      if (!m) throw ConfigError("unknown method '" + name + "'");
      grid.methods.push_back(AgentKind{*m, tau, 0.0});
    }
  } else {
    for (auto& m : grid.methods) m.temperature = tau;
  }
  grid.seeds = grid.base.seeds;
  grid.episodes = episodes;
  grid.jobs = jobs;
  const auto cells = run_grid(grid, [](const GridCell& c) {
    std::printf("%s b0=%g r=%g seed=%llu agent1=%.3f welfare=%.3f revenue=%.3f\n", c.method.c_str(), c.b0,
                c.ratio, static_cast<unsigned long long>(c.seed), c.agent1_value, c.social_welfare, c.revenue);
    std::fflush(stdout);
  });
  write_grid(fs::path(out), cells);
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<MetricRecord> records;
  for (const auto& path : inputs) {
    auto part = read_metrics(fs::path(path));
    records.insert(records.end(), part.begin(), part.end());
  }
  if (records.empty()) throw ConfigError("report: no metric rows in the inputs");
  const auto agg = aggregate(records);
  if (out.empty()) write_aggregate(std::cout, agg);
  else write_aggregate(fs::path(out), agg);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent auto-bidding simulator"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-logs", "write a synthetic impression log CSV");
  std::string gen_out;
  LogGeneratorConfig gen_cfg;
  std::uint64_t gen_seed = 2024;
  gen->add_option("--out", gen_out, "output CSV")->required();
  gen->add_option("--episodes", gen_cfg.episodes);
  gen->add_option("--timesteps", gen_cfg.timesteps);
  gen->add_option("--opportunities", gen_cfg.opportunities);
  gen->add_option("--ads-per-group", gen_cfg.ads_per_group);
  gen->add_option("--recalled-per-group", gen_cfg.recalled_per_group);
  gen->add_option("--first-episode", gen_cfg.first_episode);
  gen->add_option("--seed", gen_seed);

  ConfigFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "train one configuration over its seeds");
  train_flags.attach(train_cmd);
  std::string train_out = "runs/run";
  train_cmd->add_option("--out", train_out, "output directory");

  ConfigFlags grid_flags;
  auto* grid_cmd = app.add_subcommand("grid", "two-agent budget sweep");
  grid_flags.attach(grid_cmd);
  std::vector<double> grid_b0s, grid_ratios;
  std::vector<std::string> grid_methods;
  double grid_tau = 4.0;
  int grid_episodes = 5000;
  unsigned grid_jobs = 1;
  std::string grid_out = "grid.csv";
  grid_cmd->add_option("--b0s", grid_b0s);
  grid_cmd->add_option("--grid-ratios", grid_ratios, "agent 1 budget shares");
  grid_cmd->add_option("--methods", grid_methods);
  grid_cmd->add_option("--grid-tau", grid_tau);
  grid_cmd->add_option("--episodes", grid_episodes);
  grid_cmd->add_option("--jobs", grid_jobs, "concurrent runs (0 = all cores)");
  grid_cmd->add_option("--out", grid_out);

  ConfigFlags eval_flags;
  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate checkpoints greedily");
  eval_flags.attach(eval_cmd);
  std::vector<std::string> eval_ckpts;
  int eval_episodes = 5;
  std::string eval_out, eval_trace;
  eval_cmd->add_option("--checkpoint", eval_ckpts, "one bundle, or one per agent")->required();
  eval_cmd->add_option("--episodes", eval_episodes);
  eval_cmd->add_option("--out", eval_out, "metrics CSV");
  eval_cmd->add_option("--trace", eval_trace, "per-step trace CSV");

  auto* report_cmd = app.add_subcommand("report", "aggregate metrics CSVs over seeds");
  std::vector<std::string> report_in;
  std::string report_out;
  report_cmd->add_option("--in", report_in, "metrics CSV files")->required();
  report_cmd->add_option("--out", report_out, "aggregate CSV (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) return cmd_gen_logs(gen_out, gen_cfg, gen_seed);
    if (*train_cmd) return cmd_train(train_flags, train_out);
    if (*grid_cmd)
      return cmd_grid(grid_flags, grid_b0s, grid_ratios, grid_methods, grid_tau, grid_episodes, grid_jobs, grid_out);
    if (*eval_cmd) return cmd_evaluate(eval_flags, eval_ckpts, eval_episodes, eval_out, eval_trace);
    if (*report_cmd) return cmd_report(report_in, report_out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
