// Acceptance runner. Usage: acceptance [criterion ...]  (default: all)
// Prints one PASS/FAIL line per criterion and exits non-zero on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "autobid/agents.hpp"
#include "autobid/auction.hpp"
#include "autobid/grid.hpp"
#include "autobid/report.hpp"
#include "autobid/rewards.hpp"
#include "autobid/trainer.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace autobid;

namespace {

struct Verdict {
  bool pass{false};
  std::string detail;
};

class Stopwatch {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_{std::chrono::steady_clock::now()};
};

std::string fmt(const char* pattern, auto... args) {
  char buffer[512];
  std::snprintf(buffer, sizeof buffer, pattern, args...);
  return buffer;
}

struct Summary {
  double mean{0.0};
  double sd{0.0};
  std::size_t n{0};
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(s.n);
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.sd = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
  return s;
}

// next is "not larger" than prev up to two standard errors of the difference.
bool not_increasing_within_noise(const Summary& prev, const Summary& next) {
  const double se = std::sqrt(prev.sd * prev.sd / static_cast<double>(prev.n) +
                              next.sd * next.sd / static_cast<double>(next.n));
  return next.mean <= prev.mean + 2.0 * se;
}

// ---------------------------------------------------------------------------

Verdict auction_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> size(1, 10), coarse(0, 8), style(0, 2);
  std::uniform_real_distribution<double> amount(0.0, 5.0), quality(0.05, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Bid> bids(static_cast<std::size_t>(size(rng)));
    std::vector<double> values(bids.size());
    for (auto& v : values) v = amount(rng);
    const int s = style(rng);
    for (std::size_t i = 0; i < bids.size(); ++i) {
      bids[i].agent_id = i;
      // Coarse amounts with unit quality produce plenty of exact ties.
      bids[i].amount = s == 0 ? 0.625 * coarse(rng) : amount(rng);
      bids[i].quality = s == 2 ? quality(rng) : 1.0;
    }
    const auto got = run_auction(bids, values);
    const auto want = oracle::sort_auction(bids);
    bool same = got.winner == want.winner && got.payment == want.payment;
    for (std::size_t i = 0; i < bids.size(); ++i)
      same = same && got.raw_rewards[i] == (want.winner == i ? values[i] : 0.0);
    if (!same) ++mismatches;
  }
  const double t = clock.seconds();
  return {mismatches == 0 && t < 5.0, fmt("10000 bid vectors, %d mismatches, %.2f s", mismatches, t)};
}

Verdict trca_invariants() {
  Stopwatch clock;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_real_distribution<double> bid(0.0, 5.0), log_tau(-2.0, 3.0), reward(0.0, 2.0);
  double worst_sum = 0.0, worst_conservation = 0.0;
  int monotone_violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> bids(static_cast<std::size_t>(size(rng)));
    for (auto& b : bids) b = bid(rng);
    const double tau = std::pow(10.0, log_tau(rng));
    const auto w = trca_weights(bids, tau);
    double sum = 0.0;
    for (double x : w) sum += x;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));

    std::vector<double> raw(bids.size());
    double total = 0.0;
    for (auto& r : raw) total += (r = reward(rng));
    const auto credited = assign_rewards(TrcaParams{tau}, raw, bids);
    double credited_total = 0.0;
    for (double c : credited) credited_total += c;
    worst_conservation = std::max(worst_conservation, std::abs(credited_total - total));

    const std::size_t who = static_cast<std::size_t>(trial) % bids.size();
    auto raised = bids;
    raised[who] += 0.5 * bid(rng);
    if (trca_weights(raised, tau)[who] < w[who]) ++monotone_violations;
  }

  int limit_failures = 0;
  std::uniform_int_distribution<int> levels(0, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> bids(static_cast<std::size_t>(size(rng)));
    std::set<int> used;
    for (auto& b : bids) {
      int level;
      do level = levels(rng);
      while (!used.insert(level).second);
      b = 0.25 * level;
    }
    const auto top = static_cast<std::size_t>(std::max_element(bids.begin(), bids.end()) - bids.begin());
    if (!(trca_weights(bids, 1e-6)[top] > 1.0 - 1e-6)) ++limit_failures;
    const double uniform = 1.0 / static_cast<double>(bids.size());
    for (double x : trca_weights(bids, 1e6))
      if (!(std::abs(x - uniform) < 1e-5)) ++limit_failures;
  }
  const double t = clock.seconds();
  const bool pass = worst_sum <= 1e-9 && worst_conservation <= 1e-9 && monotone_violations == 0 &&
                    limit_failures == 0 && t < 10.0;
  return {pass, fmt("max |sum-1| %.2e, max conservation error %.2e, %d monotonicity and %d limit "
                    "violations, %.2f s",
                    worst_sum, worst_conservation, monotone_violations, limit_failures, t)};
}

// Independent root of (v1 / 2 v2)(exp((b_min - b_max) / tau) + 1) = 1, bisected
// in long double directly on the inequality in 1/tau.
double threshold_by_bisection(double v1, double v2, double b_min, double b_max) {
  const long double a = v1 / (2.0L * v2);
  const auto g = [&](long double inv_tau) { return a * (std::exp((b_min - b_max) * inv_tau) + 1.0L); };
  long double lo = 0.0L, hi = 1.0L;  // g(lo) >= 1 (cooperative), g(hi) < 1 once hi is large
  while (g(hi) >= 1.0L) hi *= 2.0L;
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (g(mid) >= 1.0L ? lo : hi) = mid;
  }
  return static_cast<double>(1.0L / lo);
}

Verdict theorem_check() {
  Stopwatch clock;
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int flip_failures = 0, bisection_disagreements = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double v1 = 0.2 + u(rng);
    const double v2 = v1 * (0.5 + 0.49 * u(rng)) + 1e-9;
    const double b_min = 2.0 * u(rng);
    const double b_max = b_min + 0.5 + 4.0 * u(rng);
    const double tau = std::get<double>(cooperation_threshold(v1, v2, b_min, b_max));
    if (std::abs(tau / threshold_by_bisection(v1, v2, b_min, b_max) - 1.0) > 1e-6) ++bisection_disagreements;
    if (verify_theorem(v1, v2, b_min, b_max, 0.98 * tau, 201) ||
        !verify_theorem(v1, v2, b_min, b_max, 1.02 * tau, 201))
      ++flip_failures;
  }
  int cooperative_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double v2 = 0.1 + u(rng);
    const double v1 = v2 * (2.0 + 2.0 * u(rng));
    const double b_min = 2.0 * u(rng);
    const double b_max = b_min + 0.5 + 4.0 * u(rng);
    if (!std::holds_alternative<AlwaysCooperative>(cooperation_threshold(v1, v2, b_min, b_max)))
      ++cooperative_failures;
    for (double tau : {0.5, 2.0, 10.0})
      if (!verify_theorem(v1, v2, b_min, b_max, tau, 201)) ++cooperative_failures;
  }
  const double reference = std::get<double>(cooperation_threshold(1.0, 0.75, 0.0, 5.0));
  const double reference_oracle = threshold_by_bisection(1.0, 0.75, 0.0, 5.0);
  const bool reference_ok =
      std::abs(reference - 7.2135) <= 0.001 && std::abs(reference_oracle - 7.2135) <= 0.001;
  const double t = clock.seconds();
  const bool pass = flip_failures == 0 && bisection_disagreements == 0 && cooperative_failures == 0 &&
                    reference_ok && t < 120.0;
  return {pass, fmt("%d/200 flip failures at +-2%%, %d bisection disagreements, %d/400 cooperative "
                    "failures, reference tau* %.6f (bisection %.6f), %.1f s",
                    flip_failures, bisection_disagreements, cooperative_failures, reference,
                    reference_oracle, t)};
}

Verdict gradient_check() {
  Stopwatch clock;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    worst = std::max(worst, oracle::random_gradient_check(1000 + seed).max_relative_error);
  const double t = clock.seconds();
  return {worst <= 1e-4 && t < 30.0, fmt("50 networks, max relative error %.2e, %.2f s", worst, t)};
}

// ---------------------------------------------------------------------------

GridConfig two_agent_grid(std::vector<AgentKind> methods, std::vector<double> ratios) {
  GridConfig grid;
  grid.b0s = {1.0};
  grid.ratios = std::move(ratios);
  grid.methods = std::move(methods);
  grid.seeds = {1, 2, 3};
  grid.episodes = 5000;
  return grid;
}

void print_cell(const GridCell& c) {
  std::cout << fmt("  %s b0=%g r=%g seed=%llu agent1=%.3f welfare=%.3f revenue=%.3f", c.method.c_str(), c.b0,
                   c.ratio, static_cast<unsigned long long>(c.seed), c.agent1_value, c.social_welfare,
                   c.revenue)
            << std::endl;
}

Verdict oligarch(const std::vector<GridCell>& cells) {
  std::vector<double> agent1, welfare;
  for (const auto& c : cells)
    if (c.method == "CM-IL" && c.ratio == 0.7) {
      agent1.push_back(c.agent1_value);
      welfare.push_back(c.social_welfare);
    }
  const double a = summarize(agent1).mean, w = summarize(welfare).mean;
  const double share = w > 0.0 ? a / w : 0.0;
  return {share >= 0.60, fmt("CM-IL r=0.7: agent1 %.3f of welfare %.3f, share %.3f (need >= 0.60)", a, w,
                             share)};
}

Verdict cooperation(const std::vector<GridCell>& cells) {
  std::map<std::string, std::vector<double>> welfare, revenue;
  for (const auto& c : cells) {
    welfare[c.method].push_back(c.social_welfare);
    revenue[c.method].push_back(c.revenue);
  }
  const double sw_cm = summarize(welfare["CM-IL"]).mean, sw_co = summarize(welfare["CO-IL"]).mean;
  const double rev_cm = summarize(revenue["CM-IL"]).mean, rev_co = summarize(revenue["CO-IL"]).mean;
  return {sw_co >= sw_cm && rev_co <= 0.8 * rev_cm,
          fmt("welfare CO-IL %.3f vs CM-IL %.3f; revenue CO-IL %.3f vs 0.8 x CM-IL %.3f", sw_co, sw_cm, rev_co,
              0.8 * rev_cm)};
}

// ---------------------------------------------------------------------------

struct GroupedOutcome {
  Summary welfare;
  Summary revenue;
};

GroupedOutcome run_grouped(const AgentKind& kind, double b0, const StepObserver& observer = {}) {
  auto config = ExperimentConfig::grouped(kind, b0, {1.5, 0.5, 1.0});
  config.run_id = kind.label();
  config.seeds = {1, 2, 3};
  const Environments envs = build_environments(config);
  std::vector<double> welfare, revenue;
  for (std::uint64_t seed : config.seeds) {
    const auto run = run_experiment(config, envs, seed, observer);
    const auto& last = run.history.back();
    welfare.push_back(last.social_welfare);
    revenue.push_back(last.revenue);
    std::cout << fmt("  %s b0=%g seed=%llu step=%lld welfare=%.4f revenue=%.3f", config.run_id.c_str(), b0,
                     static_cast<unsigned long long>(seed), static_cast<long long>(last.step),
                     last.social_welfare, last.revenue)
              << std::endl;
  }
  return {summarize(welfare), summarize(revenue)};
}

std::string describe(const char* name, const GroupedOutcome& o) {
  return fmt("%s welfare %.4f+-%.4f revenue %.2f+-%.2f", name, o.welfare.mean, o.welfare.sd, o.revenue.mean,
             o.revenue.sd);
}

Verdict temperature_monotonicity() {
  const auto cm = run_grouped(AgentKind::cmil(), 0.25);
  const auto mix = run_grouped(AgentKind::mixil(2.0), 0.25);
  const auto co = run_grouped(AgentKind::coil(), 0.25);
  const bool revenue_ok =
      not_increasing_within_noise(cm.revenue, mix.revenue) && not_increasing_within_noise(mix.revenue, co.revenue);
  const bool welfare_ok = mix.welfare.mean >= cm.welfare.mean;
  return {revenue_ok && welfare_ok, describe("CM-IL", cm) + "; " + describe("MIX-IL(2)", mix) + "; " +
                                        describe("CO-IL", co)};
}

// Counts bar-gated steps and any gated step with a non-zero reward.
struct GateAudit {
  long gated{0};
  long violations{0};

  StepObserver observer() {
    return [this](const TrainingStep& s) {
      for (std::size_t i = 0; i < s.actions->size(); ++i) {
        const auto& a = (*s.actions)[i];
        if (!a.bar || (*s.bids)[i] >= *a.bar) continue;
        ++gated;
        if (s.rewards->bidder[i] != 0.0 || s.rewards->bar[i] != 0.0) ++violations;
      }
    };
  }
};

Verdict bar_agents() {
  GateAudit audit;
  const auto mix = run_grouped(AgentKind::mixil(4.0), 0.5);
  const auto maab = run_grouped(AgentKind::maab(4.0), 0.5, audit.observer());
  const auto fix1 = run_grouped(AgentKind::maab_fix(4.0, 1.0), 0.5);
  const auto fix4 = run_grouped(AgentKind::maab_fix(4.0, 4.0), 0.5);
  const bool pass = maab.revenue.mean > mix.revenue.mean && fix4.welfare.mean < fix1.welfare.mean &&
                    audit.violations == 0 && audit.gated > 0;
  return {pass, describe("MIX-IL(4)", mix) + "; " + describe("MAAB", maab) + "; " + describe("MAAB-fix(1)", fix1) +
                    "; " + describe("MAAB-fix(4)", fix4) +
                    fmt("; %ld gated MAAB steps, %ld with non-zero reward", audit.gated, audit.violations)};
}

// ---------------------------------------------------------------------------

ExperimentConfig small_grouped(const AgentKind& kind) {
  auto config = ExperimentConfig::grouped(kind, 0.25, {1.5, 0.5, 1.0});
  config.run_id = kind.label();
  config.train_log_generator.episodes = 4;
  config.test_log_generator.episodes = 2;
  config.max_steps = 2400;
  config.eval_every = 1200;
  config.batch_size = 8;
  config.seeds = {11};
  return config;
}

ExperimentConfig small_two_agent(const AgentKind& kind) {
  auto config = ExperimentConfig::two_agent(kind, 0.5, 0.7);
  config.run_id = kind.label();
  config.max_steps = 4000;
  config.eval_every = 2000;
  config.batch_size = 8;
  config.seeds = {11};
  return config;
}

std::string metrics_csv(const ExperimentConfig& config) {
  std::vector<MetricsRow> rows;
  for (std::uint64_t seed : config.seeds) {
    const auto run = run_experiment(config, seed);
    rows.insert(rows.end(), run.history.begin(), run.history.end());
  }
  std::ostringstream out;
  write_metrics(out, to_records(rows));
  return out.str();
}

// Largest amount by which an agent's spend exceeded its budget, relative to
// the payment that pushed it over; > 1 means more than one payment.
struct SpendAudit {
  std::vector<double> budgets;
  std::vector<double> spent;
  double worst_excess{0.0};  // overspend minus the crossing payment
  long payments_after_exhaustion{0};

  void start(const std::vector<double>& b) {
    budgets = b;
    spent.assign(b.size(), 0.0);
  }
  void charge(std::size_t agent, double payment) {
    const bool exhausted = spent[agent] >= budgets[agent];
    if (exhausted && payment > 0.0) ++payments_after_exhaustion;
    spent[agent] += payment;
    if (!exhausted) worst_excess = std::max(worst_excess, spent[agent] - budgets[agent] - payment);
  }
};

Verdict determinism_and_accounting() {
  std::vector<std::string> problems;
  int runs = 0;
  double worst_revenue_error = 0.0;
  SpendAudit spend;
  const std::vector<AgentKind> grouped_kinds{AgentKind::msb(),      AgentKind::dqns(),         AgentKind::cmil(),
                                             AgentKind::coil(),     AgentKind::mixil(2.0),     AgentKind::maab(4.0),
                                             AgentKind::maab_fix(4.0, 1.0)};
  const std::vector<AgentKind> two_agent_kinds{AgentKind::cmil(), AgentKind::coil(), AgentKind::mixil(4.0),
                                               AgentKind::maab(4.0), AgentKind::maab_fix(4.0, 4.0)};
  std::vector<ExperimentConfig> configs;
  for (const auto& k : grouped_kinds) configs.push_back(small_grouped(k));
  for (const auto& k : two_agent_kinds) configs.push_back(small_two_agent(k));

  for (const auto& config : configs) {
    if (metrics_csv(config) != metrics_csv(config)) problems.push_back(config.run_id + " metrics differ");

    const Environments envs = build_environments(config);
    // Training-time spend, observed per step.
    const std::size_t n = envs.budgets.size();
    std::int64_t current_episode = -1;
    const auto observer = [&](const TrainingStep& s) {
      if (s.episode != current_episode) {
        spend.start(envs.budgets);
        current_episode = s.episode;
      }
      for (std::size_t i = 0; i < n; ++i) spend.charge(i, s.report->payments[i]);
    };
    const auto run = run_experiment(config, envs, config.seeds.front(), observer);
    ++runs;

    // Evaluation-time spend and revenue against the recorded auctions.
    std::vector<RosterEntry> roster;
    if (run.bundles.size() == 1) {
      roster = roster_of(run.bundles.front());
    } else {
      for (const auto& b : run.bundles) roster.push_back({&b, 0});
    }
    EvalTrace trace;
    const auto row = evaluate(roster, *envs.test, config.eval_episodes, &trace);
    const double oracle_total = oracle::revenue_from_impressions(trace.impressions);
    const double error = std::abs(row.revenue * config.eval_episodes - oracle_total);
    worst_revenue_error = std::max(worst_revenue_error, error);
    if (row.revenue != run.history.back().revenue)
      problems.push_back(config.run_id + " re-evaluation differs from the final metrics row");

    int episode = -1;
    for (const auto& s : trace.steps) {
      if (s.episode != episode) {
        spend.start(envs.test->initial_budgets());
        episode = s.episode;
      }
      spend.charge(s.agent, s.payment);
    }
  }
  const bool pass = problems.empty() && worst_revenue_error <= 1e-9 && spend.worst_excess <= 1e-9 &&
                    spend.payments_after_exhaustion == 0;
  std::string detail = fmt("%d runs reproduced bit-identically; max revenue error %.2e; overspend beyond "
                           "one payment %.2e; %ld payments after exhaustion",
                           runs, worst_revenue_error, spend.worst_excess, spend.payments_after_exhaustion);
  for (const auto& p : problems) detail += "; " + p;
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  if (wanted.empty()) wanted = {1, 2, 3, 4, 5, 6, 7, 8, 9};

  std::map<int, Verdict> verdicts;
  const auto run = [&](int id, const std::function<Verdict()>& check) {
    if (!wanted.count(id)) return;
    try {
      verdicts[id] = check();
    } catch (const std::exception& e) {
      verdicts[id] = {false, std::string("exception: ") + e.what()};
    }
    std::cout << "criterion " << id << ": " << (verdicts[id].pass ? "PASS" : "FAIL") << " - "
              << verdicts[id].detail << std::endl;
  };

  run(1, auction_oracle);
  run(2, trca_invariants);
  run(3, theorem_check);
  run(4, gradient_check);
  if (wanted.count(5) || wanted.count(6)) {
    const auto methods = wanted.count(6) ? std::vector<AgentKind>{AgentKind::cmil(), AgentKind::coil()}
                                         : std::vector<AgentKind>{AgentKind::cmil()};
    const auto ratios = wanted.count(6) ? std::vector<double>{0.3, 0.5, 0.7} : std::vector<double>{0.7};
    std::vector<GridCell> cells;
    try {
      cells = run_grid(two_agent_grid(methods, ratios), print_cell);
    } catch (const std::exception& e) {
      std::cout << "two-agent grid failed: " << e.what() << std::endl;
    }
    run(5, [&] { return oligarch(cells); });
    run(6, [&] { return cooperation(cells); });
  }
  run(7, temperature_monotonicity);
  run(8, bar_agents);
  run(9, determinism_and_accounting);

  bool all = true;
  for (const auto& [id, v] : verdicts) all = all && v.pass;
  return all ? 0 : 1;
}
