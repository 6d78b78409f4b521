#include "autobid/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "autobid/environment.hpp"

#include "autobid/errors.hpp"

namespace autobid {

using nlohmann::json;

std::string to_string(EnvKind kind) {
  return kind == EnvKind::TwoAgent ? "two_agent" : "grouped_log";
}

std::optional<EnvKind> parse_env_kind(std::string_view text) {
  if (text == "two_agent") return EnvKind::TwoAgent;
  if (text == "grouped_log") return EnvKind::GroupedLog;
  return std::nullopt;
}

void ExperimentConfig::validate() const {
  method.validate();
  if (run_id.empty() || run_id.find_first_of(",\n\"") != std::string::npos)
    throw ConfigError("run_id must be non-empty and free of commas, quotes and newlines");
  if (env == EnvKind::TwoAgent) {
    if (num_agents < 1) throw ConfigError("num_agents must be positive");
    if (episode_length < 1) throw ConfigError("episode_length must be positive");
    if (!(value_variance >= 0.0)) throw ConfigError("value_variance must be >= 0");
    if (ratios.size() != num_agents) throw ConfigError("ratios: one entry per agent required");
    if (method.method == Method::MSB || method.method == Method::DQNS)
      throw ConfigError(method.name() + " needs manually set bids (grouped_log environment)");
  }
  if (!(b0 > 0.0)) throw ConfigError("b0 must be positive");
  if (ratios.empty()) throw ConfigError("ratios must not be empty");
  for (double r : ratios)
    if (!(r >= 0.0)) throw ConfigError("ratios must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
  if (eval_every < 1 || max_steps % eval_every != 0)
    throw ConfigError("eval_every must be positive and divide max_steps");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be positive");
  if (target_sync < 1) throw ConfigError("target_sync must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (buffer_capacity < batch_size) throw ConfigError("buffer_capacity must be >= batch_size");
  if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(optimizer.decay >= 0.0 && optimizer.decay < 1.0)) throw ConfigError("rmsprop_decay must lie in [0, 1)");
  if (!(optimizer.epsilon > 0.0)) throw ConfigError("rmsprop_eps must be positive");
  if (!(epsilon.start >= 0.0 && epsilon.start <= 1.0 && epsilon.end >= 0.0 && epsilon.end <= 1.0))
    throw ConfigError("epsilon_start and epsilon_end must lie in [0, 1]");
  if (epsilon.anneal_steps < 0) throw ConfigError("epsilon_anneal_steps must be >= 0");
  if (hidden.empty()) throw ConfigError("hidden must list at least one layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  if (!(reward_scale > 0.0)) throw ConfigError("reward_scale must be positive");
  if (!(bar_reward_scale > 0.0)) throw ConfigError("bar_reward_scale must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (env == EnvKind::GroupedLog) {
    try {
      if (!train_log) train_log_generator.validate();
      if (!test_log) test_log_generator.validate();
    } catch (const DomainError& e) {
      throw ConfigError(std::string("log generator: ") + e.what());
    }
  }
}

ExperimentConfig ExperimentConfig::two_agent(const AgentKind& kind, double b0, double ratio) {
  ExperimentConfig c;
  c.method = kind;
  c.env = EnvKind::TwoAgent;
  c.b0 = b0;
  c.ratios = {ratio, 1.0 - ratio};
  c.max_steps = 5000LL * kTwoAgentEpisodeLength;
  c.eval_every = 10000;
  c.run_id = kind.label();
  return c;
}

ExperimentConfig ExperimentConfig::grouped(const AgentKind& kind, double b0, std::vector<double> ratios) {
  ExperimentConfig c;
  c.method = kind;
  c.env = EnvKind::GroupedLog;
  c.b0 = b0;
  c.ratios = std::move(ratios);
  c.num_agents = c.ratios.size();
  c.max_steps = 200000;
  c.eval_every = 10000;
  c.normalize_rewards = true;
  c.reward_scale = 100.0;
  c.train_log_generator.episodes = 10;
  c.test_log_generator.episodes = 5;
  c.test_log_generator.first_episode = 1000;
  c.run_id = kind.label();
  return c;
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

void apply_generator(LogGeneratorConfig& g, const json& j, const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    if (key == "episodes") g.episodes = value.get<int>();
    else if (key == "timesteps") g.timesteps = value.get<int>();
    else if (key == "opportunities") g.opportunities = value.get<int>();
    else if (key == "ads_per_group") g.ads_per_group = value.get<int>();
    else if (key == "recalled_per_group") g.recalled_per_group = value.get<int>();
    else if (key == "quality_low") g.quality_low = value.get<double>();
    else if (key == "quality_high") g.quality_high = value.get<double>();
    else if (key == "msb_scale") g.msb_scale = value.get<double>();
    else if (key == "msb_noise") g.msb_noise = value.get<double>();
    else if (key == "first_episode") g.first_episode = value.get<int>();
    else if (key == "groups") {
      g.groups.clear();
      for (const auto& item : value) {
        const auto objective = parse_objective(item.at("objective").get<std::string>());
        if (!objective) throw ConfigError(prefix + ".groups: unknown objective");
        g.groups.push_back({*objective, item.at("log_mean").get<double>(),
                            item.at("log_sigma").get<double>()});
      }
    } else {
      throw ConfigError("unknown config key '" + prefix + "." + key + "'");
    }
  }
}

const std::set<std::string> kKnownKeys{
    "run_id", "method", "temperature", "fixed_bar", "env", "num_agents", "episode_length",
    "value_mean", "value_variance", "b0", "ratios", "gamma", "max_steps", "eval_every",
    "eval_episodes", "target_sync", "batch_size", "buffer_capacity", "learning_rate",
    "rmsprop_decay", "rmsprop_eps", "epsilon_start", "epsilon_end", "epsilon_anneal_steps",
    "hidden", "reward_scale", "normalize_rewards", "bar_reward_scale", "seeds", "data_seed",
    "eval_seed", "train_log", "test_log", "train_log_generator", "test_log_generator"};

}  // namespace

void apply_json(ExperimentConfig& c, std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");

  take(j, "run_id", c.run_id);
  if (j.contains("method")) {
    const auto name = j.at("method").get<std::string>();
    const auto m = parse_method(name);
    if (!m) throw ConfigError("unknown method '" + name + "'");
    c.method.method = *m;
  }
  take(j, "temperature", c.method.temperature);
  take(j, "fixed_bar", c.method.fixed_bar);
  if (j.contains("env")) {
    const auto name = j.at("env").get<std::string>();
    const auto e = parse_env_kind(name);
    if (!e) throw ConfigError("unknown env '" + name + "' (two_agent or grouped_log)");
    c.env = *e;
  }
  take(j, "num_agents", c.num_agents);
  take(j, "episode_length", c.episode_length);
  take(j, "value_mean", c.value_mean);
  take(j, "value_variance", c.value_variance);
  take(j, "b0", c.b0);
  take(j, "ratios", c.ratios);
  take(j, "gamma", c.gamma);
  take(j, "max_steps", c.max_steps);
  take(j, "eval_every", c.eval_every);
  take(j, "eval_episodes", c.eval_episodes);
  take(j, "target_sync", c.target_sync);
  take(j, "batch_size", c.batch_size);
  take(j, "buffer_capacity", c.buffer_capacity);
  take(j, "learning_rate", c.optimizer.learning_rate);
  take(j, "rmsprop_decay", c.optimizer.decay);
  take(j, "rmsprop_eps", c.optimizer.epsilon);
  take(j, "epsilon_start", c.epsilon.start);
  take(j, "epsilon_end", c.epsilon.end);
  take(j, "epsilon_anneal_steps", c.epsilon.anneal_steps);
  take(j, "hidden", c.hidden);
  take(j, "reward_scale", c.reward_scale);
  take(j, "normalize_rewards", c.normalize_rewards);
  take(j, "bar_reward_scale", c.bar_reward_scale);
  take(j, "seeds", c.seeds);
  take(j, "data_seed", c.data_seed);
  take(j, "eval_seed", c.eval_seed);
  if (j.contains("train_log")) c.train_log = j.at("train_log").get<std::string>();
  if (j.contains("test_log")) c.test_log = j.at("test_log").get<std::string>();
  try {
    if (j.contains("train_log_generator"))
      apply_generator(c.train_log_generator, j.at("train_log_generator"), "train_log_generator");
    if (j.contains("test_log_generator"))
      apply_generator(c.test_log_generator, j.at("test_log_generator"), "test_log_generator");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("log generator: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig defaults) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_json(defaults, text.str());
  return defaults;
}

std::string to_json(const ExperimentConfig& c) {
  auto generator = [](const LogGeneratorConfig& g) {
    json groups = json::array();
    for (const auto& d : g.groups)
      groups.push_back({{"objective", std::string(to_string(d.objective))},
                        {"log_mean", d.log_mean},
                        {"log_sigma", d.log_sigma}});
    return json{{"episodes", g.episodes},
                {"timesteps", g.timesteps},
                {"opportunities", g.opportunities},
                {"ads_per_group", g.ads_per_group},
                {"recalled_per_group", g.recalled_per_group},
                {"quality_low", g.quality_low},
                {"quality_high", g.quality_high},
                {"msb_scale", g.msb_scale},
                {"msb_noise", g.msb_noise},
                {"first_episode", g.first_episode},
                {"groups", groups}};
  };
  json j{{"run_id", c.run_id},
         {"method", c.method.name()},
         {"temperature", c.method.temperature},
         {"fixed_bar", c.method.fixed_bar},
         {"env", to_string(c.env)},
         {"num_agents", c.num_agents},
         {"episode_length", c.episode_length},
         {"value_mean", c.value_mean},
         {"value_variance", c.value_variance},
         {"b0", c.b0},
         {"ratios", c.ratios},
         {"gamma", c.gamma},
         {"max_steps", c.max_steps},
         {"eval_every", c.eval_every},
         {"eval_episodes", c.eval_episodes},
         {"target_sync", c.target_sync},
         {"batch_size", c.batch_size},
         {"buffer_capacity", c.buffer_capacity},
         {"learning_rate", c.optimizer.learning_rate},
         {"rmsprop_decay", c.optimizer.decay},
         {"rmsprop_eps", c.optimizer.epsilon},
         {"epsilon_start", c.epsilon.start},
         {"epsilon_end", c.epsilon.end},
         {"epsilon_anneal_steps", c.epsilon.anneal_steps},
         {"hidden", c.hidden},
         {"reward_scale", c.reward_scale},
         {"normalize_rewards", c.normalize_rewards},
         {"bar_reward_scale", c.bar_reward_scale},
         {"seeds", c.seeds},
         {"data_seed", c.data_seed},
         {"eval_seed", c.eval_seed},
         {"train_log_generator", generator(c.train_log_generator)},
         {"test_log_generator", generator(c.test_log_generator)}};
  if (c.train_log) j["train_log"] = c.train_log->string();
  if (c.test_log) j["test_log"] = c.test_log->string();
  return j.dump(2);
}

}  // namespace autobid
