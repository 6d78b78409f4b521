#include "autobid/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autobid/errors.hpp"

namespace autobid {

int ActionGrid::index_of(double bid) noexcept {
  const long k = std::lround(bid / kStep);
  return static_cast<int>(std::clamp(k, 0L, static_cast<long>(kSize - 1)));
}

double EpsilonSchedule::value(std::int64_t step) const noexcept {
  if (anneal_steps <= 0 || step >= anneal_steps) return end;
  const double slope = (start - end) / static_cast<double>(anneal_steps);
  return std::max(end, start - slope * static_cast<double>(std::max<std::int64_t>(step, 0)));
}

namespace {

std::vector<int> qnet_sizes(std::size_t num_agents, const std::vector<int>& hidden) {
  std::vector<int> sizes{static_cast<int>(kObservationDim + num_agents)};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(ActionGrid::kSize);
  return sizes;
}

}  // namespace

QNet QNet::create(std::size_t num_agents, Rng& rng, RmsPropOptions options,
                  const std::vector<int>& hidden) {
  QNet q;
  q.num_agents = num_agents;
  q.net = Mlp::uniform(qnet_sizes(num_agents, hidden), rng);
  q.optimizer = RmsProp(q.net, options);
  return q;
}

QNet QNet::zeros(std::size_t num_agents, RmsPropOptions options, const std::vector<int>& hidden) {
  QNet q;
  q.num_agents = num_agents;
  q.net = Mlp(qnet_sizes(num_agents, hidden));
  q.optimizer = RmsProp(q.net, options);
  return q;
}

void encode_input(std::span<const double> features, std::size_t agent, std::size_t num_agents,
                  double* out) {
  std::copy(features.begin(), features.end(), out);
  std::fill(out + features.size(), out + features.size() + num_agents, 0.0);
  out[features.size() + agent] = 1.0;
}

std::vector<double> encode_input(const Observation& obs, std::size_t agent, std::size_t num_agents) {
  if (agent >= num_agents) throw DomainError("encode_input: agent id out of range");
  std::vector<double> x(kObservationDim + num_agents);
  const auto f = obs.features();
  encode_input(f, agent, num_agents, x.data());
  return x;
}

Eigen::VectorXd forward(const QNet& q, std::span<const double> input) { return q.net.forward(input); }

int greedy_action(const Eigen::VectorXd& values) {
  int best = 0;
  for (int k = 1; k < values.size(); ++k)
    if (values(k) > values(best)) best = k;
  return best;
}

int select_action(const QNet& q, std::span<const double> input, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, ActionGrid::kSize - 1);
    return pick(rng);
  }
  return greedy_action(forward(q, input));
}

void sync_target(const QNet& net, QNet& target) {
  if (!net.net.same_shape(target.net)) throw DomainError("sync_target: network shapes differ");
  target.net.layers() = net.net.layers();
  target.num_agents = net.num_agents;
}

void ReplayBuffer::insert(EpisodeRecord episode) {
  episodes_.push_back(std::move(episode));
  ++inserted_;
  while (episodes_.size() > capacity_) episodes_.pop_front();
}

std::optional<Batch> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0 || buffer.size() < batch_size) return std::nullopt;
  std::vector<std::size_t> all(buffer.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  // Partial Fisher-Yates: the first batch_size slots are a uniform draw
  // without replacement.
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  Batch batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(&buffer.episodes()[all[i]]);
  return batch;
}

namespace {

std::size_t batch_transitions(const Batch& batch) {
  std::size_t n = 0;
  for (const auto* ep : batch) n += ep->transitions.size();
  return n;
}

// Columns are encoded inputs; `next` selects o' instead of o.
Eigen::MatrixXd batch_inputs(const Batch& batch, std::size_t num_agents, bool next) {
  const auto rows = static_cast<Eigen::Index>(kObservationDim + num_agents);
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(batch_transitions(batch)));
  Eigen::Index col = 0;
  for (const auto* ep : batch)
    for (const auto& tr : ep->transitions) {
      if (tr.agent >= num_agents) throw DomainError("batch: agent id exceeds the network's agent count");
      encode_input(next ? tr.next_obs : tr.obs, tr.agent, num_agents, x.col(col).data());
      ++col;
    }
  return x;
}

}  // namespace

std::vector<double> td_targets(const Batch& batch, const QNet& target, double gamma, Head head) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw DomainError("td_targets: gamma must lie in [0, 1]");
  std::vector<double> y;
  y.reserve(batch_transitions(batch));
  const Eigen::MatrixXd next_q = target.net.forward_batch(batch_inputs(batch, target.num_agents, true));
  Eigen::Index col = 0;
  for (const auto* ep : batch)
    for (const auto& tr : ep->transitions) {
      const double r = head == Head::Bidder ? tr.reward : tr.bar_reward;
      y.push_back(tr.terminal || gamma == 0.0 ? r : r + gamma * next_q.col(col).maxCoeff());
      ++col;
    }
  return y;
}

double train_step(QNet& q, const Batch& batch, std::span<const double> targets, Head head) {
  if (batch.empty()) throw DomainError("train_step: empty batch");
  const Eigen::MatrixXd x = batch_inputs(batch, q.num_agents, false);
  std::vector<int> actions;
  actions.reserve(static_cast<std::size_t>(x.cols()));
  for (const auto* ep : batch)
    for (const auto& tr : ep->transitions)
      actions.push_back(head == Head::Bidder ? tr.action : tr.bar_action);

  std::vector<DenseLayer> gradient;
  const double loss = q.net.selected_loss_gradient(x, actions, targets, gradient);
  if (!std::isfinite(loss)) throw TrainingError("train_step: non-finite loss");
  q.optimizer.apply(q.net, gradient);
  return loss;
}

}  // namespace autobid
