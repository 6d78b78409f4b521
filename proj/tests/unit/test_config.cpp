#include <gtest/gtest.h>

#include "autobid/config.hpp"
#include "autobid/errors.hpp"

using namespace autobid;

TEST(ExperimentConfig, PresetsAreValid) {
  EXPECT_NO_THROW(ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.7).validate());
  const auto g = ExperimentConfig::grouped(AgentKind::maab(4.0), 0.25, {1.5, 0.5, 1.0});
  EXPECT_NO_THROW(g.validate());
  EXPECT_EQ(g.gamma, 0.99);
  EXPECT_EQ(g.eval_every, 10000);
  EXPECT_EQ(g.target_sync, 200);
  EXPECT_EQ(g.batch_size, 32u);
  EXPECT_EQ(g.buffer_capacity, 5000u);
}

TEST(ExperimentConfig, ValidationErrors) {
  auto c = ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.5);
  c.eval_every = 3000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.5);
  c.ratios = {-0.1, 1.1};
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig::two_agent(AgentKind::cmil(), 0.0, 0.5);
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig::two_agent(AgentKind::msb(), 1.0, 0.5);
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.5);
  c.seeds.clear();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ExperimentConfig, JsonOverridesOnlyGivenKeys) {
  auto c = ExperimentConfig::grouped(AgentKind::cmil(), 0.25, {1.0, 1.0, 1.0});
  apply_json(c, R"({"method": "MIX-IL", "temperature": 2, "ratios": [1.5, 0.5, 1],
                    "seeds": [1, 2, 3], "train_log_generator": {"episodes": 4}})");
  EXPECT_EQ(c.method.method, Method::MIXIL);
  EXPECT_EQ(c.method.temperature, 2.0);
  EXPECT_EQ(c.ratios, (std::vector<double>{1.5, 0.5, 1.0}));
  EXPECT_EQ(c.seeds.size(), 3u);
  EXPECT_EQ(c.train_log_generator.episodes, 4);
  EXPECT_EQ(c.b0, 0.25);
  EXPECT_EQ(c.env, EnvKind::GroupedLog);
}

TEST(ExperimentConfig, JsonErrors) {
  ExperimentConfig c;
  EXPECT_THROW(apply_json(c, "{not json"), ConfigError);
  EXPECT_THROW(apply_json(c, R"({"learning_rte": 0.1})"), ConfigError);
  EXPECT_THROW(apply_json(c, R"({"method": "PPO"})"), ConfigError);
  EXPECT_THROW(apply_json(c, R"({"b0": "high"})"), ConfigError);
  EXPECT_THROW(apply_json(c, "[1, 2]"), ConfigError);
}

TEST(ExperimentConfig, JsonRoundTrip) {
  auto c = ExperimentConfig::grouped(AgentKind::maab_fix(4.0, 1.0), 0.5, {1.5, 0.5, 1.0});
  c.seeds = {4, 5};
  ExperimentConfig back;
  apply_json(back, to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.method.fixed_bar, 1.0);
  EXPECT_EQ(back.normalize_rewards, true);
}
