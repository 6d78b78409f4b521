#include "autobid/mlp.hpp"

#include <cmath>

#include "autobid/errors.hpp"

namespace autobid {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw DomainError("Mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw DomainError("Mlp: layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]),
                       Eigen::VectorXd::Zero(sizes_[l + 1])});
}

Mlp Mlp::uniform(std::vector<int> sizes, Rng& rng) {
  Mlp net(std::move(sizes));
  for (auto& layer : net.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = u(rng);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = u(rng);
  }
  return net;
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

Eigen::VectorXd Mlp::forward(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_dim())
    throw DomainError("Mlp::forward: input has " + std::to_string(input.size()) +
                      " entries, expected " + std::to_string(input_dim()));
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(input.data(), input_dim());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weight * h + layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& inputs) const {
  if (inputs.rows() != input_dim()) throw DomainError("Mlp::forward_batch: input dimension mismatch");
  Eigen::MatrixXd h = inputs;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = layers_[l].weight * h;
    z.colwise() += layers_[l].bias;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

namespace {

void check_selection(const Mlp& net, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                     std::span<const double> targets) {
  const auto n = static_cast<std::size_t>(inputs.cols());
  if (n == 0) throw DomainError("Mlp: empty batch");
  if (actions.size() != n || targets.size() != n)
    throw DomainError("Mlp: actions/targets must have one entry per sample");
  for (int a : actions)
    if (a < 0 || a >= net.output_dim()) throw DomainError("Mlp: action index out of range");
}

}  // namespace

double Mlp::selected_loss(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                          std::span<const double> targets) const {
  check_selection(*this, inputs, actions, targets);
  const Eigen::MatrixXd out = forward_batch(inputs);
  double loss = 0.0;
  for (Eigen::Index n = 0; n < out.cols(); ++n) {
    const double d = out(actions[static_cast<std::size_t>(n)], n) - targets[static_cast<std::size_t>(n)];
    loss += d * d;
  }
  return loss / static_cast<double>(out.cols());
}

double Mlp::selected_loss_gradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                                   std::span<const double> targets,
                                   std::vector<DenseLayer>& gradient) const {
  check_selection(*this, inputs, actions, targets);
  if (inputs.rows() != input_dim()) throw DomainError("Mlp: input dimension mismatch");
  const Eigen::Index batch = inputs.cols();
  const std::size_t L = layers_.size();

  // activations[l] is the input to layer l; activations[L] is the output.
  std::vector<Eigen::MatrixXd> activations(L + 1);
  activations[0] = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::MatrixXd z = layers_[l].weight * activations[l];
    z.colwise() += layers_[l].bias;
    if (l + 1 < L) z = z.cwiseMax(0.0);
    activations[l + 1] = std::move(z);
  }

  const double scale = 2.0 / static_cast<double>(batch);
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(output_dim(), batch);
  double loss = 0.0;
  for (Eigen::Index n = 0; n < batch; ++n) {
    const auto a = actions[static_cast<std::size_t>(n)];
    const double d = activations[L](a, n) - targets[static_cast<std::size_t>(n)];
    loss += d * d;
    delta(a, n) = scale * d;
  }
  loss /= static_cast<double>(batch);

  gradient.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    gradient[l].weight.noalias() = delta * activations[l].transpose();
    gradient[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = layers_[l].weight.transpose() * delta;
    // Rectifier derivative: active where the post-activation is positive.
    delta = back.cwiseProduct((activations[l].array() > 0.0).cast<double>().matrix());
  }
  return loss;
}

RmsProp::RmsProp(const Mlp& net, RmsPropOptions options) : options_(options) {
  for (const auto& l : net.layers())
    square_avg_.push_back({Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()),
                           Eigen::VectorXd::Zero(l.bias.size())});
}

void RmsProp::apply(Mlp& net, const std::vector<DenseLayer>& gradient) {
  if (gradient.size() != net.layers().size() || square_avg_.size() != gradient.size())
    throw DomainError("RmsProp::apply: gradient layout does not match the network");
  const double a = options_.decay;
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (std::size_t l = 0; l < gradient.size(); ++l) {
    auto& v = square_avg_[l];
    const auto& g = gradient[l];
    auto& p = net.layers()[l];
    v.weight.array() = a * v.weight.array() + (1.0 - a) * g.weight.array().square();
    v.bias.array() = a * v.bias.array() + (1.0 - a) * g.bias.array().square();
    p.weight.array() -= lr * g.weight.array() / (v.weight.array().sqrt() + eps);
    p.bias.array() -= lr * g.bias.array() / (v.bias.array().sqrt() + eps);
  }
}

}  // namespace autobid
