#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "autobid/rng.hpp"

namespace autobid {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Fully connected network: rectifier on hidden layers, linear output.
// Samples are columns in the batched interfaces.
class Mlp {
public:
  Mlp() = default;
  // sizes = {input, hidden..., output}; parameters start at zero.
  explicit Mlp(std::vector<int> sizes);

  // Weights and biases uniform in +-1/sqrt(fan_in).
  static Mlp uniform(std::vector<int> sizes, Rng& rng);

  int input_dim() const noexcept { return sizes_.front(); }
  int output_dim() const noexcept { return sizes_.back(); }
  const std::vector<int>& sizes() const noexcept { return sizes_; }

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t parameter_count() const noexcept;
  bool same_shape(const Mlp& other) const noexcept { return sizes_ == other.sizes_; }

  // Throws DomainError on a dimension mismatch.
  Eigen::VectorXd forward(std::span<const double> input) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& inputs) const;

  // Loss = mean_n (out(x_n)[a_n] - y_n)^2 and its gradient with respect to
  // every parameter (same layout as layers()).
  double selected_loss(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                       std::span<const double> targets) const;
  double selected_loss_gradient(const Eigen::MatrixXd& inputs, std::span<const int> actions,
                                std::span<const double> targets,
                                std::vector<DenseLayer>& gradient) const;

private:
  std::vector<int> sizes_;
  std::vector<DenseLayer> layers_;
};

struct RmsPropOptions {
  double learning_rate{5e-4};
  double decay{0.99};
  double epsilon{1e-5};
};

// v <- decay v + (1 - decay) g^2;  w <- w - lr g / (sqrt(v) + epsilon)
class RmsProp {
public:
  RmsProp() = default;
  RmsProp(const Mlp& net, RmsPropOptions options);

  void apply(Mlp& net, const std::vector<DenseLayer>& gradient);

  const RmsPropOptions& options() const noexcept { return options_; }
  const std::vector<DenseLayer>& accumulators() const noexcept { return square_avg_; }

private:
  RmsPropOptions options_;
  std::vector<DenseLayer> square_avg_;
};

}  // namespace autobid
