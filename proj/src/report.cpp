#include "autobid/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <tuple>

#include "autobid/errors.hpp"
#include "autobid/impression_log.hpp"

namespace autobid {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <class T>
T parse_field(const std::string& text, int line, int column) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc{} || r.ptr != text.data() + text.size())
    throw ParseError(line, column, "cannot parse '" + text + "'");
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

void check_header(std::istream& in, std::string_view expected) {
  std::string header;
  if (!std::getline(in, header)) throw SchemaError("empty CSV");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header != expected) throw SchemaError("unexpected CSV header '" + header + "'");
}

// Yields (line number, fields) for every non-empty data row.
template <class F>
void for_rows(std::istream& in, std::size_t width, F&& f) {
  std::string line;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv(line);
    if (fields.size() != width)
      throw ParseError(number, static_cast<int>(std::min(fields.size(), width)) + 1,
                       "expected " + std::to_string(width) + " fields");
    f(number, fields);
  }
}

}  // namespace

std::vector<MetricRecord> to_records(const MetricsRow& row) {
  std::vector<MetricRecord> out;
  for (std::size_t g = 0; g < row.norm_values.size(); ++g)
    out.push_back({row.run_id, row.seed, row.step, row.groups.at(g), "norm_value", row.norm_values[g]});
  out.push_back({row.run_id, row.seed, row.step, std::string(kAllGroups), "social_welfare", row.social_welfare});
  out.push_back({row.run_id, row.seed, row.step, std::string(kAllGroups), "revenue", row.revenue});
  return out;
}

std::vector<MetricRecord> to_records(std::span<const MetricsRow> rows) {
  std::vector<MetricRecord> out;
  for (const auto& row : rows) {
    auto part = to_records(row);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

void write_metrics(std::ostream& out, std::span<const MetricRecord> records) {
  out << kMetricsHeader << '\n';
  for (const auto& r : records)
    out << r.run_id << ',' << r.seed << ',' << r.step << ',' << r.group << ',' << r.metric << ','
        << format_sig9(r.value) << '\n';
}

void write_metrics(const std::filesystem::path& path, std::span<const MetricRecord> records) {
  auto out = open_out(path);
  write_metrics(out, records);
}

std::vector<MetricRecord> read_metrics(std::istream& in) {
  check_header(in, kMetricsHeader);
  std::vector<MetricRecord> out;
  for_rows(in, 6, [&](int line, const std::vector<std::string>& f) {
    out.push_back({f[0], parse_field<std::uint64_t>(f[1], line, 2), parse_field<std::int64_t>(f[2], line, 3),
                   f[3], f[4], parse_field<double>(f[5], line, 6)});
  });
  return out;
}

std::vector<MetricRecord> read_metrics(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_metrics(in);
}

std::vector<AggregateRecord> aggregate(std::span<const MetricRecord> records) {
  using Key = std::tuple<std::string, std::int64_t, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  std::vector<Key> order;
  for (const auto& r : records) {
    Key key{r.run_id, r.step, r.group, r.metric};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
  }
  std::vector<AggregateRecord> out;
  for (const auto& key : order) {
    const auto& v = groups.at(key);
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key), mean, sd, v.size()});
  }
  return out;
}

void write_aggregate(std::ostream& out, std::span<const AggregateRecord> rows) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows)
    out << r.run_id << ',' << r.step << ',' << r.group << ',' << r.metric << ',' << format_sig9(r.mean) << ','
        << format_sig9(r.sd) << ',' << r.n << '\n';
}

void write_aggregate(const std::filesystem::path& path, std::span<const AggregateRecord> rows) {
  auto out = open_out(path);
  write_aggregate(out, rows);
}

void write_grid(std::ostream& out, std::span<const GridCell> cells) {
  out << kGridHeader << '\n';
  for (const auto& c : cells)
    out << c.method << ',' << format_sig9(c.b0) << ',' << format_sig9(c.ratio) << ',' << c.seed << ','
        << format_sig9(c.agent1_value) << ',' << format_sig9(c.social_welfare) << ','
        << format_sig9(c.revenue) << '\n';
}

void write_grid(const std::filesystem::path& path, std::span<const GridCell> cells) {
  auto out = open_out(path);
  write_grid(out, cells);
}

std::vector<GridCell> read_grid(std::istream& in) {
  check_header(in, kGridHeader);
  std::vector<GridCell> out;
  for_rows(in, 7, [&](int line, const std::vector<std::string>& f) {
    out.push_back({f[0], parse_field<double>(f[1], line, 2), parse_field<double>(f[2], line, 3),
                   parse_field<std::uint64_t>(f[3], line, 4), parse_field<double>(f[4], line, 5),
                   parse_field<double>(f[5], line, 6), parse_field<double>(f[6], line, 7)});
  });
  return out;
}

std::vector<GridCell> read_grid(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_grid(in);
}

void write_trace(std::ostream& out, const EvalTrace& trace, int episode_length) {
  out << kTraceHeader << '\n';
  for (const auto& s : trace.steps)
    out << static_cast<std::int64_t>(s.episode) * episode_length + s.step << ',' << s.agent << ','
        << format_sig9(s.bid) << ',' << s.wins << ',' << format_sig9(s.payment) << ',' << format_sig9(s.value)
        << ',' << format_sig9(s.remaining_budget) << '\n';
}

void write_trace(const std::filesystem::path& path, const EvalTrace& trace, int episode_length) {
  auto out = open_out(path);
  write_trace(out, trace, episode_length);
}

}  // namespace autobid
