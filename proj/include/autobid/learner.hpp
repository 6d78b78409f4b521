#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "autobid/mlp.hpp"
#include "autobid/multi_agent_env.hpp"
#include "autobid/rng.hpp"

namespace autobid {

// Bid grid {0, 0.25, ..., 5.0}.
struct ActionGrid {
  static constexpr int kSize = 21;
  static constexpr double kStep = 0.25;
  static constexpr double kMax = kStep * (kSize - 1);

  static constexpr double value(int index) noexcept { return kStep * index; }
  // Nearest grid index for a bid, clamped to the grid.
  static int index_of(double bid) noexcept;
};

struct EpsilonSchedule {
  double start{1.0};
  double end{0.05};
  std::int64_t anneal_steps{50000};

  double value(std::int64_t step) const noexcept;
};

inline const std::vector<int> kQNetHidden{64, 64, 64};

// Action-value network over the bid grid, with one-hot agent ids appended
// to the observation so several agents can share parameters.
struct QNet {
  Mlp net;
  RmsProp optimizer;
  std::size_t num_agents{1};

  static QNet create(std::size_t num_agents, Rng& rng, RmsPropOptions options = {},
                     const std::vector<int>& hidden = kQNetHidden);
  // Every parameter zero (greedy action is then always index 0).
  static QNet zeros(std::size_t num_agents, RmsPropOptions options = {},
                    const std::vector<int>& hidden = kQNetHidden);

  int input_dim() const noexcept { return net.input_dim(); }
};

// Network input: observation features followed by the agent's one-hot id.
std::vector<double> encode_input(const Observation& obs, std::size_t agent, std::size_t num_agents);
void encode_input(std::span<const double> features, std::size_t agent, std::size_t num_agents,
                  double* out);

// Q(o, .) for one encoded input. Throws DomainError on a dimension mismatch.
Eigen::VectorXd forward(const QNet& q, std::span<const double> input);

// Greedy index with ties to the lowest index.
int greedy_action(const Eigen::VectorXd& values);

// Epsilon-greedy over the grid: uniform index with probability epsilon.
int select_action(const QNet& q, std::span<const double> input, double epsilon, Rng& rng);

// Target becomes an exact copy of the online parameters.
void sync_target(const QNet& net, QNet& target);

struct Transition {
  std::array<double, kObservationDim> obs{};
  std::array<double, kObservationDim> next_obs{};
  std::uint16_t agent{0};
  std::int16_t action{0};
  std::int16_t bar_action{0};
  bool terminal{false};
  double reward{0.0};
  double bar_reward{0.0};
};

struct EpisodeRecord {
  std::uint64_t id{0};
  std::vector<Transition> transitions;
};

// FIFO of complete episodes.
class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity = 5000) : capacity_(capacity) {}

  void insert(EpisodeRecord episode);
  std::size_t size() const noexcept { return episodes_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t inserted() const noexcept { return inserted_; }
  const std::deque<EpisodeRecord>& episodes() const noexcept { return episodes_; }

private:
  std::size_t capacity_;
  std::uint64_t inserted_{0};
  std::deque<EpisodeRecord> episodes_;
};

using Batch = std::vector<const EpisodeRecord*>;

// batch_size distinct episodes drawn uniformly; nullopt when the buffer holds
// fewer than batch_size episodes.
std::optional<Batch> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng);

enum class Head { Bidder, Bar };

// y = r for terminal transitions, r + gamma * max_b' Q_target(o', b') otherwise,
// in batch order (episode-major, then transition order).
std::vector<double> td_targets(const Batch& batch, const QNet& target, double gamma,
                               Head head = Head::Bidder);

// One RMSprop step on the mean squared TD error; returns the pre-update loss.
// Throws TrainingError on a non-finite loss (parameters untouched).
double train_step(QNet& q, const Batch& batch, std::span<const double> targets,
                  Head head = Head::Bidder);

}  // namespace autobid
