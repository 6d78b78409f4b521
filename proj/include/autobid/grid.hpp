#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "autobid/config.hpp"
#include "autobid/report.hpp"

namespace autobid {

struct GridConfig {
  std::vector<double> b0s{0.25, 0.5, 0.75, 1.0};
  // Agent 1's share r; agent 2 gets 1 - r.
  std::vector<double> ratios{0.3, 0.5, 0.7};
  std::vector<AgentKind> methods{AgentKind::cmil(), AgentKind::coil(), AgentKind::mixil(4.0),
                                 AgentKind::maab(4.0)};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int episodes{5000};
  // Template for every run (learning parameters, evaluation, data seeds).
  ExperimentConfig base{ExperimentConfig::two_agent(AgentKind::cmil(), 1.0, 0.5)};
  // Concurrent runs; 0 picks the hardware concurrency.
  unsigned jobs{1};

  void validate() const;
};

// The run for one (method, b0, ratio, seed): `episodes` two-agent episodes
// with a single evaluation at the end.
ExperimentConfig cell_config(const GridConfig& grid, const AgentKind& method, double b0, double ratio);

// Run seed of a cell, split from the configured seed by the cell's position
// in the (b0, ratio) grid.
std::uint64_t cell_seed(std::uint64_t seed, std::size_t b0_index, std::size_t ratio_index);

GridCell run_cell(const GridConfig& grid, const AgentKind& method, std::size_t b0_index,
                  std::size_t ratio_index, std::uint64_t seed);

// Every (method, b0, ratio, seed), ordered method-major then b0, ratio and
// seed. Runs execute concurrently on `jobs` threads; results do not depend
// on the thread count. `progress` is called (serialised) after each run.
std::vector<GridCell> run_grid(const GridConfig& grid,
                               const std::function<void(const GridCell&)>& progress = {});

}  // namespace autobid
