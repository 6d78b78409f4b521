#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "autobid/errors.hpp"
#include "autobid/impression_log.hpp"

using namespace autobid;

namespace {

const std::string kHeader = "episode,timestep,opportunity_id,ad_id,group,value,quality,msb\n";

ImpressionLog read_text(const std::string& text) {
  std::istringstream in(text);
  return read_log(in);
}

}  // namespace

TEST(GenerateLog, EpisodeHasSixtyTimesteps) {
  LogGeneratorConfig config;
  const auto log = generate_log(config, 3);
  std::set<int> timesteps;
  for (const auto& r : log) {
    EXPECT_EQ(r.episode, 0);
    timesteps.insert(r.timestep);
  }
  EXPECT_EQ(timesteps.size(), 60u);
  EXPECT_EQ(log.size(), 60u * 20u * 3u);
}

TEST(GenerateLog, RecordsAreValidSortedAndUnique) {
  LogGeneratorConfig config;
  config.episodes = 2;
  config.recalled_per_group = 3;
  const auto log = generate_log(config, 4);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& r = log[i];
    EXPECT_GE(r.value, 0.0);
    EXPECT_GE(r.quality, config.quality_low);
    EXPECT_LE(r.quality, config.quality_high);
    EXPECT_GE(r.msb, 0.0);
    if (i > 0) {
      const auto& p = log[i - 1];
      EXPECT_LT(std::tie(p.episode, p.timestep, p.opportunity_id, p.ad_id),
                std::tie(r.episode, r.timestep, r.opportunity_id, r.ad_id));
    }
  }
}

TEST(GenerateLog, FixedSeedIsBitIdentical) {
  LogGeneratorConfig config;
  config.episodes = 2;
  EXPECT_EQ(generate_log(config, 9), generate_log(config, 9));
  EXPECT_NE(generate_log(config, 9), generate_log(config, 10));
}

TEST(GenerateLog, GroupMeansMatchLogNormal) {
  LogGeneratorConfig config;
  config.episodes = 90;  // 90 * 60 * 20 records per group
  const auto log = generate_log(config, 5);
  for (const auto& g : config.groups) {
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& r : log)
      if (r.group == g.objective) {
        sum += r.value;
        sq += r.value * r.value;
        ++n;
      }
    ASSERT_GE(n, 100000u);
    const double mean = sum / static_cast<double>(n);
    const double var = sq / static_cast<double>(n) - mean * mean;
    const double se = std::sqrt(var / static_cast<double>(n));
    const double analytic = std::exp(g.log_mean + 0.5 * g.log_sigma * g.log_sigma);
    EXPECT_NEAR(mean, analytic, 3.0 * se) << to_string(g.objective);
    EXPECT_DOUBLE_EQ(lognormal_mean(g.log_mean, g.log_sigma), analytic);
  }
}

TEST(GenerateLog, RejectsInvalidParameters) {
  LogGeneratorConfig config;
  config.groups[0].log_sigma = -1.0;
  EXPECT_THROW(generate_log(config, 1), DomainError);
  config = {};
  config.quality_high = 1.5;
  EXPECT_THROW(generate_log(config, 1), DomainError);
  config = {};
  config.timesteps = 0;
  EXPECT_THROW(generate_log(config, 1), DomainError);
}

TEST(LogCsv, RoundTripIsLossless) {
  LogGeneratorConfig config;
  config.episodes = 2;
  config.first_episode = 7;
  const auto log = generate_log(config, 6);
  std::stringstream buffer;
  write_log(buffer, log);
  EXPECT_EQ(read_log(buffer), log);
}

TEST(LogCsv, HeaderMismatchIsSchemaError) {
  EXPECT_THROW(read_text("episode,timestep,ad_id\n"), SchemaError);
  EXPECT_THROW(read_text(""), SchemaError);
}

TEST(LogCsv, MalformedRowsNameLineAndColumn) {
  try {
    read_text(kHeader + "0,0,0,1,CLICK,0.5,0.5,1.0\n0,0,1,1,CLICK,-0.5,0.5,1.0\n");
    FAIL() << "negative value accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 6u);
  }
  try {
    read_text(kHeader + "0,0,0,1,BOGUS,0.5,0.5,1.0\n");
    FAIL() << "unknown group accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 5u);
  }
  EXPECT_THROW(read_text(kHeader + "0,0,0,1,CLICK,0.5,1.5,1.0\n"), ParseError);
  EXPECT_THROW(read_text(kHeader + "0,0,0,1,CLICK,0.5,0.5,-1\n"), ParseError);
  EXPECT_THROW(read_text(kHeader + "0,0,0,1,CLICK,0.5,0.5\n"), ParseError);
  EXPECT_THROW(read_text(kHeader + "0,x,0,1,CLICK,0.5,0.5,1\n"), ParseError);
}

TEST(Sig9, RoundingIsStable) {
  for (double x : {0.1, 1.0 / 3.0, 123456.789012, 2.5e-7}) {
    const double r = round_sig9(x);
    EXPECT_EQ(round_sig9(r), r);
    EXPECT_EQ(std::stod(format_sig9(r)), r);
    EXPECT_NEAR(r, x, std::abs(x) * 1e-8);
  }
}
