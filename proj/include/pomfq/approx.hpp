#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pomfq/rng.hpp"

namespace pomfq {

enum class Activation : std::uint8_t { Identity = 0, Relu = 1 };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::Identity;
};

/// Feed-forward network: rectifier hidden layers, identity output layer.
struct NetworkParams {
  std::vector<Layer> layers;

  std::size_t input_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().weight.cols()); }
  std::size_t output_size() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.back().weight.rows()); }
  std::size_t parameter_count() const;
  bool same_shape(const NetworkParams& other) const;
};

bool operator==(const NetworkParams& a, const NetworkParams& b);

struct GradientSet {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

/// Uniform fan-in initialization U(-1/sqrt(in), 1/sqrt(in)) for weights and biases.
NetworkParams make_network(std::size_t input_size, std::span<const std::size_t> hidden, std::size_t output_size,
                           Rng& rng);

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& input);
/// Column-per-example batch evaluation.
Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs);

struct LossAndGrad {
  double loss = 0.0;
  GradientSet grads;
};

/// Mean squared error between `targets[k]` and output `actions[k]` of
/// example k, with exact reverse-mode gradients.
LossAndGrad loss_and_grad(const NetworkParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                          std::span<const double> targets);

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  GradientSet first_moment;
  GradientSet second_moment;
};

OptimizerState make_optimizer(const NetworkParams& params, const AdamConfig& config = {});

/// One bias-corrected adaptive-moment step, in place.
void optimizer_step(NetworkParams& params, const GradientSet& grads, OptimizerState& state);

/// target <- tau * online + (1 - tau) * target.
void soft_update(NetworkParams& target, const NetworkParams& online, double tau);

}  // namespace pomfq
