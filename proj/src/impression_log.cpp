#include "autobid/impression_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "autobid/errors.hpp"
#include "autobid/rng.hpp"

namespace autobid {

std::string_view to_string(Objective objective) noexcept {
  switch (objective) {
    case Objective::Click: return "CLICK";
    case Objective::Conv: return "CONV";
    case Objective::Cart: return "CART";
  }
  return "CLICK";
}

std::optional<Objective> parse_objective(std::string_view text) noexcept {
  if (text == "CLICK") return Objective::Click;
  if (text == "CONV") return Objective::Conv;
  if (text == "CART") return Objective::Cart;
  return std::nullopt;
}

void LogGeneratorConfig::validate() const {
  if (episodes < 1 || timesteps < 1 || opportunities < 1)
    throw DomainError("log generator: episodes, timesteps and opportunities must be positive");
  if (ads_per_group < 1 || recalled_per_group < 1 || recalled_per_group > ads_per_group)
    throw DomainError("log generator: need 1 <= recalled_per_group <= ads_per_group");
  if (groups.empty()) throw DomainError("log generator: at least one group required");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (!std::isfinite(groups[i].log_mean) || !(groups[i].log_sigma >= 0.0) ||
        !std::isfinite(groups[i].log_sigma))
      throw DomainError("log generator: invalid log-normal parameters");
    for (std::size_t j = 0; j < i; ++j)
      if (groups[j].objective == groups[i].objective)
        throw DomainError("log generator: duplicate objective");
  }
  if (!(quality_low >= 0.0) || !(quality_high <= 1.0) || !(quality_low <= quality_high))
    throw DomainError("log generator: quality band must satisfy 0 <= low <= high <= 1");
  if (!(msb_scale >= 0.0) || !(msb_noise >= 0.0) || !std::isfinite(msb_scale) ||
      !std::isfinite(msb_noise))
    throw DomainError("log generator: msb_scale and msb_noise must be non-negative");
  if (first_episode < 0) throw DomainError("log generator: first_episode must be >= 0");
}

double lognormal_mean(double log_mean, double log_sigma) {
  return std::exp(log_mean + 0.5 * log_sigma * log_sigma);
}

double round_sig9(double x) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return std::strtod(buf, nullptr);
}

std::string format_sig9(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

ImpressionLog generate_log(const LogGeneratorConfig& config, std::uint64_t seed) {
  config.validate();
  ImpressionLog log;
  log.reserve(static_cast<std::size_t>(config.episodes) * config.timesteps * config.opportunities *
              config.groups.size() * config.recalled_per_group);
  std::vector<int> pool(static_cast<std::size_t>(config.ads_per_group));
  for (int e = 0; e < config.episodes; ++e) {
    const int episode = config.first_episode + e;
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(episode));
    std::uniform_real_distribution<double> quality(config.quality_low, config.quality_high);
    std::normal_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < config.timesteps; ++t) {
      for (int o = 0; o < config.opportunities; ++o) {
        const std::size_t first = log.size();
        for (std::size_t g = 0; g < config.groups.size(); ++g) {
          const auto& dist = config.groups[g];
          std::iota(pool.begin(), pool.end(), static_cast<int>(g) * config.ads_per_group);
          for (int k = 0; k < config.recalled_per_group; ++k) {
            std::uniform_int_distribution<int> pick(k, config.ads_per_group - 1);
            std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick(rng))]);
            ImpressionRecord r;
            r.episode = episode;
            r.timestep = t;
            r.opportunity_id = o;
            r.ad_id = pool[static_cast<std::size_t>(k)];
            r.group = dist.objective;
            const double value = std::exp(dist.log_mean + dist.log_sigma * unit(rng));
            r.value = round_sig9(value);
            r.quality = round_sig9(quality(rng));
            r.msb = round_sig9(value * config.msb_scale * std::exp(config.msb_noise * unit(rng)));
            log.push_back(r);
          }
        }
        std::sort(log.begin() + static_cast<std::ptrdiff_t>(first), log.end(),
                  [](const ImpressionRecord& a, const ImpressionRecord& b) { return a.ad_id < b.ad_id; });
      }
    }
  }
  return log;
}

void write_log(std::ostream& out, const ImpressionLog& log) {
  out << kLogHeader << '\n';
  for (const auto& r : log) {
    out << r.episode << ',' << r.timestep << ',' << r.opportunity_id << ',' << r.ad_id << ','
        << to_string(r.group) << ',' << format_sig9(r.value) << ',' << format_sig9(r.quality) << ','
        << format_sig9(r.msb) << '\n';
  }
}

void write_log(const std::filesystem::path& path, const ImpressionLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_log(out, log);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                         : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

int parse_int(std::string_view s, std::size_t line, std::size_t col) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(line, col, "expected an integer, got '" + std::string(s) + "'");
  if (v < 0) throw ParseError(line, col, "negative index");
  return v;
}

double parse_real(std::string_view s, std::size_t line, std::size_t col) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(line, col, "expected a finite number, got '" + std::string(s) + "'");
  return v;
}

}  // namespace

ImpressionLog read_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("impression log: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLogHeader)
    throw SchemaError("impression log: header mismatch, expected '" + std::string(kLogHeader) + "'");

  ImpressionLog log;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 8)
      throw ParseError(lineno, f.size() < 8 ? f.size() + 1 : 9,
                       "expected 8 fields, found " + std::to_string(f.size()));
    ImpressionRecord r;
    r.episode = parse_int(f[0], lineno, 1);
    r.timestep = parse_int(f[1], lineno, 2);
    r.opportunity_id = parse_int(f[2], lineno, 3);
    r.ad_id = parse_int(f[3], lineno, 4);
    const auto obj = parse_objective(f[4]);
    if (!obj) throw ParseError(lineno, 5, "unknown group '" + std::string(f[4]) + "'");
    r.group = *obj;
    r.value = parse_real(f[5], lineno, 6);
    if (r.value < 0.0) throw ParseError(lineno, 6, "value must be non-negative");
    r.quality = parse_real(f[6], lineno, 7);
    if (r.quality < 0.0 || r.quality > 1.0) throw ParseError(lineno, 7, "quality must lie in [0, 1]");
    r.msb = parse_real(f[7], lineno, 8);
    if (r.msb < 0.0) throw ParseError(lineno, 8, "msb must be non-negative");
    log.push_back(r);
  }
  return log;
}

ImpressionLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_log(in);
}

}  // namespace autobid
