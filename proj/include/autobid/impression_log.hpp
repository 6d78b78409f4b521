#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autobid {

enum class Objective { Click = 0, Conv = 1, Cart = 2 };

std::string_view to_string(Objective objective) noexcept;
std::optional<Objective> parse_objective(std::string_view text) noexcept;

// One recalled ad for one impression opportunity.
struct ImpressionRecord {
  int episode{0};
  int timestep{0};
  int opportunity_id{0};
  int ad_id{0};
  Objective group{Objective::Click};
  double value{0.0};
  double quality{0.0};  // pCTR proxy in [0, 1]
  double msb{0.0};      // manually set bid

  bool operator==(const ImpressionRecord&) const = default;
};

// Records sorted by (episode, timestep, opportunity_id, ad_id).
using ImpressionLog = std::vector<ImpressionRecord>;

struct GroupDistribution {
  Objective objective{Objective::Click};
  double log_mean{-1.2};   // mu of the log-normal value distribution
  double log_sigma{0.5};
};

struct LogGeneratorConfig {
  int episodes{1};
  int timesteps{60};
  int opportunities{20};
  int ads_per_group{10};
  int recalled_per_group{1};
  std::vector<GroupDistribution> groups{
      {Objective::Click, -1.2, 0.5}, {Objective::Conv, -1.6, 0.5}, {Objective::Cart, -1.4, 0.5}};
  double quality_low{0.2};
  double quality_high{1.0};
  // msb = value * msb_scale * LogNormal(0, msb_noise)
  double msb_scale{2.0};
  double msb_noise{0.2};
  // Added to every episode index written to the log.
  int first_episode{0};

  void validate() const;
};

// Analytic mean of LogNormal(mu, sigma).
double lognormal_mean(double log_mean, double log_sigma);

// Deterministic in (config, seed); each episode draws from its own split
// stream. Real fields are rounded to 9 significant digits so the CSV form
// is exact. Throws DomainError on invalid parameters.
ImpressionLog generate_log(const LogGeneratorConfig& config, std::uint64_t seed);

inline constexpr std::string_view kLogHeader =
    "episode,timestep,opportunity_id,ad_id,group,value,quality,msb";

void write_log(std::ostream& out, const ImpressionLog& log);
void write_log(const std::filesystem::path& path, const ImpressionLog& log);

// Throws SchemaError on a header mismatch and ParseError (with line and
// column) on a malformed or invalid row.
ImpressionLog read_log(std::istream& in);
ImpressionLog read_log(const std::filesystem::path& path);

// Round to 9 significant digits.
double round_sig9(double x);
std::string format_sig9(double x);

}  // namespace autobid
