#include "autobid/grid.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "autobid/errors.hpp"
#include "autobid/rng.hpp"

namespace autobid {

void GridConfig::validate() const {
  if (b0s.empty() || ratios.empty() || methods.empty() || seeds.empty())
    throw ConfigError("grid: b0s, ratios, methods and seeds must be non-empty");
  for (double r : ratios)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("grid: ratios must lie in [0, 1]");
  if (episodes < 1) throw ConfigError("grid: episodes must be positive");
  if (base.env != EnvKind::TwoAgent || base.num_agents != 2)
    throw ConfigError("grid: the sweep runs the two-agent environment");
  for (const auto& m : methods) {
    m.validate();
    if (!m.learns() || m.method == Method::DQNS) throw ConfigError("grid: " + m.name() + " is not a grid method");
  }
}

ExperimentConfig cell_config(const GridConfig& grid, const AgentKind& method, double b0, double ratio) {
  ExperimentConfig c = grid.base;
  c.method = method;
  c.b0 = b0;
  c.ratios = {ratio, 1.0 - ratio};
  c.max_steps = static_cast<std::int64_t>(grid.episodes) * c.episode_length;
  c.eval_every = c.max_steps;
  c.run_id = method.label();
  return c;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t b0_index, std::size_t ratio_index) {
  return split_seed(seed, (static_cast<std::uint64_t>(b0_index) << 16) | ratio_index);
}

GridCell run_cell(const GridConfig& grid, const AgentKind& method, std::size_t b0_index,
                  std::size_t ratio_index, std::uint64_t seed) {
  const double b0 = grid.b0s.at(b0_index);
  const double ratio = grid.ratios.at(ratio_index);
  const auto config = cell_config(grid, method, b0, ratio);
  const auto run = run_experiment(config, cell_seed(seed, b0_index, ratio_index));
  const MetricsRow& last = run.history.back();
  GridCell cell;
  cell.method = method.label();
  cell.b0 = b0;
  cell.ratio = ratio;
  cell.seed = seed;
  cell.agent1_value = last.raw_values.at(0);
  for (double v : last.raw_values) cell.social_welfare += v;
  cell.revenue = last.revenue;
  return cell;
}

std::vector<GridCell> run_grid(const GridConfig& grid, const std::function<void(const GridCell&)>& progress) {
  grid.validate();
  struct Job {
    std::size_t method, b0, ratio, seed;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < grid.methods.size(); ++m)
    for (std::size_t b = 0; b < grid.b0s.size(); ++b)
      for (std::size_t r = 0; r < grid.ratios.size(); ++r)
        for (std::size_t s = 0; s < grid.seeds.size(); ++s) jobs.push_back({m, b, r, s});

  std::vector<GridCell> cells(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        const Job& j = jobs[k];
        cells[k] = run_cell(grid, grid.methods[j.method], j.b0, j.ratio, grid.seeds[j.seed]);
        std::lock_guard lock(mutex);
        if (progress) progress(cells[k]);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned threads = grid.jobs ? grid.jobs : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return cells;
}

}  // namespace autobid
