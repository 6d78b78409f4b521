#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "autobid/trainer.hpp"

namespace autobid {

inline constexpr std::string_view kMetricsHeader = "run_id,seed,step,group,metric,value";
inline constexpr std::string_view kAggregateHeader = "run_id,step,group,metric,mean,sd,n";
inline constexpr std::string_view kGridHeader = "method,b0,ratio,seed,agent1_value,social_welfare,revenue";
inline constexpr std::string_view kTraceHeader = "step,agent_id,bid,win,payment,value,remaining_budget";

// Group label used for run-level metrics (social_welfare, revenue).
inline constexpr std::string_view kAllGroups = "all";

// Long-form metrics: one norm_value row per group, then social_welfare and
// revenue under group "all".
struct MetricRecord {
  std::string run_id;
  std::uint64_t seed{0};
  std::int64_t step{0};
  std::string group;
  std::string metric;
  double value{0.0};
};

std::vector<MetricRecord> to_records(const MetricsRow& row);
std::vector<MetricRecord> to_records(std::span<const MetricsRow> rows);

void write_metrics(std::ostream& out, std::span<const MetricRecord> records);
void write_metrics(const std::filesystem::path& path, std::span<const MetricRecord> records);
// Throws SchemaError on a wrong header and ParseError on a malformed row.
std::vector<MetricRecord> read_metrics(std::istream& in);
std::vector<MetricRecord> read_metrics(const std::filesystem::path& path);

// Mean and sample standard deviation over seeds of every
// (run_id, step, group, metric); sd is 0 for a single seed.
struct AggregateRecord {
  std::string run_id;
  std::int64_t step{0};
  std::string group;
  std::string metric;
  double mean{0.0};
  double sd{0.0};
  std::size_t n{0};
};

std::vector<AggregateRecord> aggregate(std::span<const MetricRecord> records);
void write_aggregate(std::ostream& out, std::span<const AggregateRecord> rows);
void write_aggregate(const std::filesystem::path& path, std::span<const AggregateRecord> rows);

struct GridCell {
  std::string method;
  double b0{0.0};
  double ratio{0.0};
  std::uint64_t seed{0};
  double agent1_value{0.0};
  double social_welfare{0.0};  // sum of both agents' won values
  double revenue{0.0};

  double agent2_value() const noexcept { return social_welfare - agent1_value; }
};

void write_grid(std::ostream& out, std::span<const GridCell> cells);
void write_grid(const std::filesystem::path& path, std::span<const GridCell> cells);
std::vector<GridCell> read_grid(std::istream& in);
std::vector<GridCell> read_grid(const std::filesystem::path& path);

// Evaluation trace; `step` counts timesteps across the traced episodes.
void write_trace(std::ostream& out, const EvalTrace& trace, int episode_length);
void write_trace(const std::filesystem::path& path, const EvalTrace& trace, int episode_length);

}  // namespace autobid
