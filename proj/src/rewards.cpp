#include "autobid/rewards.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "autobid/errors.hpp"

namespace autobid {

std::vector<double> trca_weights(std::span<const double> bids, double temperature) {
  if (bids.empty()) throw DomainError("trca_weights: empty bid list");
  if (!(temperature > 0.0)) throw DomainError("trca_weights: temperature must be positive");
  double top = bids[0];
  for (double b : bids) {
    if (!std::isfinite(b)) throw DomainError("trca_weights: bids must be finite");
    top = std::max(top, b);
  }
  std::vector<double> w(bids.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < bids.size(); ++i) {
    w[i] = std::exp((bids[i] - top) / temperature);
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return w;
}

std::vector<double> assign_rewards(const RewardMode& mode, std::span<const double> raw_rewards,
                                   std::span<const double> bids) {
  if (raw_rewards.size() != bids.size())
    throw DomainError("assign_rewards: rewards and bids differ in length");
  const double total = std::accumulate(raw_rewards.begin(), raw_rewards.end(), 0.0);
  return std::visit(
      [&](const auto& m) -> std::vector<double> {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Competitive>) {
          return {raw_rewards.begin(), raw_rewards.end()};
        } else if constexpr (std::is_same_v<M, Cooperative>) {
          return std::vector<double>(raw_rewards.size(), total);
        } else {
          auto alpha = trca_weights(bids, m.temperature);
          for (double& a : alpha) a *= total;
          return alpha;
        }
      },
      mode);
}

int bar_gate(double bid, double bar) noexcept { return bid >= bar ? 1 : 0; }

BarDecision decide_bar(double bid, double bar) noexcept { return {bar_gate(bid, bar), bid, bar}; }

std::pair<double, double> split_rewards(int gate, double trca_reward, double payment) {
  if (gate != 0 && gate != 1) throw DomainError("split_rewards: gate must be 0 or 1");
  if (!(payment >= 0.0)) throw DomainError("split_rewards: payment must be non-negative");
  if (gate == 0) return {0.0, 0.0};
  return {trca_reward, payment};
}

namespace {

void check_threshold_args(double v1, double v2, double b_min, double b_max) {
  if (!(v2 > 0.0) || !(v1 > v2))
    throw DomainError("cooperation_threshold: requires v1 > v2 > 0");
  if (!(b_max > b_min)) throw DomainError("cooperation_threshold: requires b_max > b_min");
}

}  // namespace

CooperationThreshold cooperation_threshold(double v1, double v2, double b_min, double b_max) {
  check_threshold_args(v1, v2, b_min, b_max);
  if (v1 >= 2.0 * v2) return AlwaysCooperative{};
  return (b_min - b_max) / std::log(2.0 * v2 / v1 - 1.0);
}

double reciprocal_threshold_form(double v1, double v2, double b_min, double b_max) {
  check_threshold_args(v1, v2, b_min, b_max);
  return std::log(2.0 * v2 / v1 - 1.0) / (b_min - b_max);
}

double cooperation_ratio(double v1, double v2, double b_min, double b_max, double temperature) {
  return v1 / (2.0 * v2) * (std::exp((b_min - b_max) / temperature) + 1.0);
}

double cooperation_threshold_bisection(double v1, double v2, double b_min, double b_max,
                                       double tolerance) {
  check_threshold_args(v1, v2, b_min, b_max);
  if (v1 >= 2.0 * v2) throw DomainError("cooperation_threshold_bisection: no finite threshold");
  // g is increasing in tau, from v1/(2 v2) < 1 towards v1/v2 > 1.
  auto f = [&](double tau) { return cooperation_ratio(v1, v2, b_min, b_max, tau) - 1.0; };
  double lo = 1e-6;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tolerance * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool verify_theorem(double v1, double v2, double b_min, double b_max, double temperature,
                    int grid_points) {
  if (grid_points < 11) throw DomainError("verify_theorem: grid_points must be >= 11");
  std::vector<double> grid(static_cast<std::size_t>(grid_points));
  for (int k = 0; k < grid_points; ++k)
    grid[static_cast<std::size_t>(k)] = b_min + (b_max - b_min) * k / (grid_points - 1);

  double best_low = -1.0;   // region L: b1 >= b2
  double best_high = -1.0;  // region H: b2 > b1
  for (double b1 : grid) {
    for (double b2 : grid) {
      // alpha_2 = 1 / (1 + exp((b1 - b2)/tau))
      const double alpha2 = 1.0 / (1.0 + std::exp((b1 - b2) / temperature));
      if (b1 >= b2)
        best_low = std::max(best_low, alpha2 * v1);
      else
        best_high = std::max(best_high, alpha2 * v2);
    }
  }
  return best_low >= best_high;
}

double normalize_episode_reward(double raw, double v_max) {
  if (!(v_max > 0.0)) throw DomainError("normalize_episode_reward: v_max must be positive");
  return raw / v_max;
}

}  // namespace autobid
