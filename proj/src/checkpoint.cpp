#include "autobid/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "autobid/errors.hpp"

namespace autobid {

namespace {

std::string exact(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_exact(const std::string& token) {
  double v = 0.0;
  const auto r = std::from_chars(token.data(), token.data() + token.size(), v);
  if (r.ec != std::errc{} || r.ptr != token.data() + token.size())
    throw SchemaError("checkpoint: bad number '" + token + "'");
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word)
    throw SchemaError("checkpoint: expected '" + word + "', found '" + tok + "'");
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw SchemaError(std::string("checkpoint: cannot read ") + what);
  return v;
}

}  // namespace

const QNet* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, q] : networks)
    if (n == name) return &q;
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  out << "autobid-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [k, v] : checkpoint.meta) out << "meta " << k << ' ' << v << '\n';
  out << "action_grid " << ActionGrid::kSize << ' ' << exact(ActionGrid::value(0)) << ' '
      << exact(ActionGrid::kStep) << '\n';
  out << "observation_scaling budget/initial value*1 timesteps/episode_length\n";
  for (const auto& [name, q] : checkpoint.networks) {
    const auto& layers = q.net.layers();
    out << "network " << name << " agents " << q.num_agents << " layers " << layers.size() << '\n';
    for (const auto& l : layers) {
      out << "dense " << l.weight.rows() << ' ' << l.weight.cols() << '\n' << 'w';
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) out << ' ' << exact(l.weight(r, c));
      out << "\nb";
      for (Eigen::Index r = 0; r < l.bias.size(); ++r) out << ' ' << exact(l.bias(r));
      out << '\n';
    }
  }
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  expect(in, "autobid-checkpoint");
  const int version = read_value<int>(in, "version");
  if (version != kCheckpointVersion)
    throw SchemaError("checkpoint: unsupported version " + std::to_string(version));
  Checkpoint cp;
  std::string tok;
  while (in >> tok) {
    if (tok == "end") return cp;
    if (tok == "meta") {
      const auto key = read_value<std::string>(in, "meta key");
      std::string value;
      std::getline(in, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      cp.meta[key] = value;
    } else if (tok == "action_grid") {
      const int size = read_value<int>(in, "grid size");
      const double first = parse_exact(read_value<std::string>(in, "grid start"));
      const double step = parse_exact(read_value<std::string>(in, "grid step"));
      if (size != ActionGrid::kSize || first != 0.0 || step != ActionGrid::kStep)
        throw SchemaError("checkpoint: action grid differs from {0, 0.25, ..., 5}");
    } else if (tok == "observation_scaling") {
      std::string rest;
      std::getline(in, rest);
      if (rest != " budget/initial value*1 timesteps/episode_length")
        throw SchemaError("checkpoint: unsupported observation scaling");
    } else if (tok == "network") {
      const auto name = read_value<std::string>(in, "network name");
      expect(in, "agents");
      const auto agents = read_value<std::size_t>(in, "agent count");
      expect(in, "layers");
      const auto count = read_value<std::size_t>(in, "layer count");
      std::vector<int> sizes;
      std::vector<DenseLayer> layers;
      for (std::size_t l = 0; l < count; ++l) {
        expect(in, "dense");
        const int rows = read_value<int>(in, "rows");
        const int cols = read_value<int>(in, "cols");
        if (rows <= 0 || cols <= 0) throw SchemaError("checkpoint: bad layer shape");
        if (sizes.empty()) sizes.push_back(cols);
        if (sizes.back() != cols) throw SchemaError("checkpoint: layer shapes do not chain");
        sizes.push_back(rows);
        DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
        expect(in, "w");
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c) layer.weight(r, c) = parse_exact(read_value<std::string>(in, "weight"));
        expect(in, "b");
        for (int r = 0; r < rows; ++r) layer.bias(r) = parse_exact(read_value<std::string>(in, "bias"));
        layers.push_back(std::move(layer));
      }
      if (sizes.empty()) throw SchemaError("checkpoint: network without layers");
      QNet q;
      q.num_agents = agents;
      q.net = Mlp(sizes);
      q.net.layers() = std::move(layers);
      if (q.net.input_dim() != static_cast<int>(kObservationDim + agents) ||
          q.net.output_dim() != ActionGrid::kSize)
        throw SchemaError("checkpoint: network '" + name + "' does not fit the observation/grid");
      q.optimizer = RmsProp(q.net, {});
      cp.networks.emplace_back(name, std::move(q));
    } else {
      throw SchemaError("checkpoint: unexpected token '" + tok + "'");
    }
  }
  throw SchemaError("checkpoint: missing 'end'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, checkpoint);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(in);
}

Checkpoint to_checkpoint(const AgentBundle& bundle) {
  Checkpoint cp;
  cp.meta["kind"] = bundle.kind.name();
  cp.meta["temperature"] = exact(bundle.kind.temperature);
  cp.meta["fixed_bar"] = exact(bundle.kind.fixed_bar);
  cp.meta["num_agents"] = std::to_string(bundle.num_agents);
  if (bundle.bidder) cp.networks.emplace_back("bidder", *bundle.bidder);
  if (bundle.bar) cp.networks.emplace_back("bar", *bundle.bar);
  return cp;
}

AgentBundle bundle_from_checkpoint(const Checkpoint& checkpoint) {
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = checkpoint.meta.find(key);
    if (it == checkpoint.meta.end()) throw SchemaError("checkpoint: missing meta '" + key + "'");
    return it->second;
  };
  const auto method = parse_method(get("kind"));
  if (!method) throw SchemaError("checkpoint: unknown kind '" + get("kind") + "'");
  AgentBundle b;
  b.kind = AgentKind{*method, parse_exact(get("temperature")), parse_exact(get("fixed_bar"))};
  b.num_agents = static_cast<std::size_t>(std::stoul(get("num_agents")));
  if (const QNet* q = checkpoint.find("bidder")) {
    b.bidder = *q;
    b.bidder_target = *q;
  }
  if (const QNet* q = checkpoint.find("bar")) {
    b.bar = *q;
    b.bar_target = *q;
  }
  if (b.kind.learns() && !b.bidder) throw SchemaError("checkpoint: learned kind without bidder network");
  if (b.kind.has_bar_net() && !b.bar) throw SchemaError("checkpoint: MAAB checkpoint without bar network");
  return b;
}

}  // namespace autobid
