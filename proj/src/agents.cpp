#include "autobid/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "autobid/errors.hpp"

namespace autobid {

void AgentKind::validate() const {
  const bool uses_tau = method == Method::MIXIL || method == Method::MAAB || method == Method::MAABFix;
  if (uses_tau && !(temperature > 0.0)) throw ConfigError(name() + ": temperature must be positive");
  if (method == Method::MAABFix && !(fixed_bar >= 0.0 && fixed_bar <= ActionGrid::kMax))
    throw ConfigError("MAAB-fix: fixed bar must lie in [0, 5]");
}

std::string AgentKind::name() const {
  switch (method) {
    case Method::MSB: return "MSB";
    case Method::DQNS: return "DQN-S";
    case Method::CMIL: return "CM-IL";
    case Method::COIL: return "CO-IL";
    case Method::MIXIL: return "MIX-IL";
    case Method::MAAB: return "MAAB";
    case Method::MAABFix: return "MAAB-fix";
  }
  return "?";
}

std::string AgentKind::label() const {
  std::ostringstream os;
  os << name();
  if (method == Method::MIXIL || method == Method::MAAB) os << "(tau=" << temperature << ")";
  if (method == Method::MAABFix) os << "(tau=" << temperature << ";bar=" << fixed_bar << ")";
  return os.str();
}

std::optional<Method> parse_method(std::string_view name) {
  std::string key;
  for (char c : name)
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (key == "msb") return Method::MSB;
  if (key == "dqns") return Method::DQNS;
  if (key == "cmil") return Method::CMIL;
  if (key == "coil") return Method::COIL;
  if (key == "mixil") return Method::MIXIL;
  if (key == "maab") return Method::MAAB;
  if (key == "maabfix") return Method::MAABFix;
  return std::nullopt;
}

RewardMode reward_mode(const AgentKind& kind) {
  switch (kind.method) {
    case Method::MSB:
    case Method::DQNS:
    case Method::CMIL: return Competitive{};
    case Method::COIL: return Cooperative{};
    default: return TrcaParams{kind.temperature};
  }
}

AgentBundle AgentBundle::create(const AgentKind& kind, std::size_t num_agents, Rng& rng,
                                const AgentOptions& options) {
  kind.validate();
  if (num_agents == 0) throw ConfigError("AgentBundle: num_agents must be positive");
  AgentBundle b;
  b.kind = kind;
  b.num_agents = num_agents;
  b.epsilon = options.epsilon;
  if (!kind.learns()) return b;
  auto make = [&] {
    return options.zero_init ? QNet::zeros(num_agents, options.optimizer, options.hidden)
                             : QNet::create(num_agents, rng, options.optimizer, options.hidden);
  };
  b.bidder = make();
  b.bidder_target = *b.bidder;
  if (kind.has_bar_net()) {
    b.bar = make();
    b.bar_target = *b.bar;
  }
  b.replay = std::make_shared<ReplayBuffer>(options.replay_capacity);
  return b;
}

AgentAction act(const AgentBundle& bundle, const Observation& obs, std::size_t agent,
                double epsilon, Rng& rng, ActMode mode) {
  AgentAction a;
  if (!bundle.kind.learns()) {
    a.manual = true;
    a.bid = obs.manual_bid;
    return a;
  }
  const auto input = encode_input(obs, agent, bundle.num_agents);
  a.bid_index = select_action(*bundle.bidder, input, epsilon, rng);
  a.bid = ActionGrid::value(a.bid_index);
  if (mode == ActMode::Evaluation) return a;
  if (bundle.kind.method == Method::MAAB) {
    a.bar_index = select_action(*bundle.bar, input, epsilon, rng);
    a.bar = ActionGrid::value(a.bar_index);
  } else if (bundle.kind.method == Method::MAABFix) {
    a.bar = bundle.kind.fixed_bar;
    a.bar_index = ActionGrid::index_of(bundle.kind.fixed_bar);
  }
  return a;
}

TrainingRewards gate_rewards(std::span<const double> credited, std::span<const double> bids,
                             std::span<const double> bars, double payment) {
  if (credited.size() != bids.size() || bars.size() != bids.size())
    throw DomainError("gate_rewards: rewards, bids and bars must be aligned");
  TrainingRewards out;
  out.bidder.resize(bids.size());
  out.bar.resize(bids.size());
  for (std::size_t i = 0; i < bids.size(); ++i) {
    const auto [bidder, bar] = split_rewards(bar_gate(bids[i], bars[i]), credited[i], payment);
    out.bidder[i] = bidder;
    out.bar[i] = bar;
  }
  return out;
}

TrainingRewards training_reward(const AgentKind& kind, std::span<const double> raw_rewards,
                                std::span<const double> bids, std::span<const double> bars,
                                double payment) {
  auto credited = assign_rewards(reward_mode(kind), raw_rewards, bids);
  if (!kind.gated()) return {std::move(credited), {}};
  if (kind.method == Method::MAABFix) {
    const std::vector<double> fixed(bids.size(), kind.fixed_bar);
    return gate_rewards(credited, bids, fixed, payment);
  }
  return gate_rewards(credited, bids, bars, payment);
}

GroupedEnv dqns_training_env(const ImpressionLog& log, std::vector<GroupSpec> groups,
                             std::size_t trained_group) {
  if (trained_group >= groups.size()) throw DomainError("dqns_training_env: no such group");
  GroupedEnv env(log, std::move(groups));
  std::vector<bool> manual(env.num_agents(), true);
  manual[trained_group] = false;
  env.force_manual(std::move(manual));
  return env;
}

}  // namespace autobid
