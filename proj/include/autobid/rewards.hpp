#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace autobid {

struct TrcaParams {
  double temperature{4.0};
};

struct Competitive {};
struct Cooperative {};
using RewardMode = std::variant<Competitive, Cooperative, TrcaParams>;

struct BarDecision {
  int gate{0};
  double bid{0.0};
  double bar{0.0};
};

// Softmax credit weights alpha_i = exp(b_i/tau) / sum_j exp(b_j/tau),
// evaluated with max-subtraction.
// Throws DomainError for tau <= 0, an empty or non-finite bid list.
std::vector<double> trca_weights(std::span<const double> bids, double temperature);

// Training rewards under `mode`: individual rewards, the total reward for
// everyone, or the total split by trca_weights.
std::vector<double> assign_rewards(const RewardMode& mode, std::span<const double> raw_rewards,
                                   std::span<const double> bids);

// z = 1 iff bid >= bar.
int bar_gate(double bid, double bar) noexcept;

BarDecision decide_bar(double bid, double bar) noexcept;

// (bidder reward, bar reward) = (gate * trca_reward, gate * payment).
std::pair<double, double> split_rewards(int gate, double trca_reward, double payment);

struct AlwaysCooperative {};
using CooperationThreshold = std::variant<double, AlwaysCooperative>;

// Smallest temperature at which agent 2's best assigned reward in the
// cooperative region (b1 >= b2) matches its best in the competitive region
// (b2 > b1), for a two-agent single auction with values v1 > v2 > 0 and bids
// in [b_min, b_max]. Closed form (b_min - b_max) / log(2 v2 / v1 - 1) when
// v1 < 2 v2; AlwaysCooperative when v1 >= 2 v2.
CooperationThreshold cooperation_threshold(double v1, double v2, double b_min, double b_max);

// The reciprocal form log(2 v2 / v1 - 1) / (b_min - b_max). Kept for
// side-by-side reporting; it does not satisfy the region inequality.
double reciprocal_threshold_form(double v1, double v2, double b_min, double b_max);

// g(tau) = (v1 / 2 v2) (exp((b_min - b_max) / tau) + 1); cooperation iff g >= 1.
double cooperation_ratio(double v1, double v2, double b_min, double b_max, double temperature);

// Root of g(tau) = 1 by bisection on a bracket grown from [1e-6, 1].
double cooperation_threshold_bisection(double v1, double v2, double b_min, double b_max,
                                       double tolerance = 1e-9);

// Brute force over a grid_points x grid_points lattice on [b_min, b_max]^2:
// true iff max_{b1 >= b2} alpha_2(b) v1 >= max_{b2 > b1} alpha_2(b) v2.
bool verify_theorem(double v1, double v2, double b_min, double b_max, double temperature,
                    int grid_points);

// raw / v_max. Throws DomainError for v_max <= 0.
double normalize_episode_reward(double raw, double v_max);

}  // namespace autobid
