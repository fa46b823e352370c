#include "pomfq/approx.hpp"

#include <cmath>

#include "pomfq/errors.hpp"

namespace pomfq {

namespace {

Eigen::MatrixXd activate(Eigen::MatrixXd z, Activation act) {
  if (act == Activation::Relu) z = z.cwiseMax(0.0);
  return z;
}

void check_congruent(const NetworkParams& params, const GradientSet& g, const char* what) {
  if (g.weight.size() != params.layers.size() || g.bias.size() != params.layers.size())
    throw DimensionError(std::string(what) + ": layer count mismatch");
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    if (g.weight[l].rows() != layer.weight.rows() || g.weight[l].cols() != layer.weight.cols() ||
        g.bias[l].size() != layer.bias.size())
      throw DimensionError(std::string(what) + ": layer shape mismatch");
  }
}

GradientSet zeros_like(const NetworkParams& params) {
  GradientSet g;
  for (const auto& layer : params.layers) {
    g.weight.push_back(Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Eigen::VectorXd::Zero(layer.bias.size()));
  }
  return g;
}

}  // namespace

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

bool NetworkParams::same_shape(const NetworkParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight.rows() != other.layers[l].weight.rows() ||
        layers[l].weight.cols() != other.layers[l].weight.cols() ||
        layers[l].activation != other.layers[l].activation)
      return false;
  }
  return true;
}

bool operator==(const NetworkParams& a, const NetworkParams& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].weight != b.layers[l].weight || a.layers[l].bias != b.layers[l].bias) return false;
  }
  return true;
}

NetworkParams make_network(std::size_t input_size, std::span<const std::size_t> hidden, std::size_t output_size,
                           Rng& rng) {
  if (input_size == 0 || output_size == 0) throw ArgumentError("make_network: empty input or output");
  NetworkParams net;
  std::size_t in = input_size;
  auto add_layer = [&](std::size_t out, Activation act) {
    if (out == 0) throw ArgumentError("make_network: zero-width layer");
    Layer layer;
    layer.activation = act;
    layer.weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    layer.bias.resize(static_cast<Eigen::Index>(out));
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
      for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) layer.weight(r, c) = bound * (2.0 * rng.uniform() - 1.0);
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = bound * (2.0 * rng.uniform() - 1.0);
    net.layers.push_back(std::move(layer));
    in = out;
  };
  for (std::size_t h : hidden) add_layer(h, Activation::Relu);
  add_layer(output_size, Activation::Identity);
  return net;
}

Eigen::VectorXd forward(const NetworkParams& params, const Eigen::VectorXd& input) {
  if (params.layers.empty()) throw StateError("forward: empty network");
  if (static_cast<std::size_t>(input.size()) != params.input_size())
    throw DimensionError("forward: input length " + std::to_string(input.size()) + " does not match network input " +
                         std::to_string(params.input_size()));
  Eigen::VectorXd x = input;
  for (const auto& layer : params.layers) {
    Eigen::VectorXd z = layer.weight * x + layer.bias;
    if (layer.activation == Activation::Relu) z = z.cwiseMax(0.0);
    x = std::move(z);
  }
  return x;
}

Eigen::MatrixXd forward_batch(const NetworkParams& params, const Eigen::MatrixXd& inputs) {
  if (params.layers.empty()) throw StateError("forward: empty network");
  if (static_cast<std::size_t>(inputs.rows()) != params.input_size())
    throw DimensionError("forward_batch: input rows do not match network input");
  Eigen::MatrixXd x = inputs;
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weight * x;
    z.colwise() += layer.bias;
    x = activate(std::move(z), layer.activation);
  }
  return x;
}

LossAndGrad loss_and_grad(const NetworkParams& params, const Eigen::MatrixXd& inputs, std::span<const int> actions,
                          std::span<const double> targets) {
  const auto batch = static_cast<std::size_t>(inputs.cols());
  if (batch == 0) throw ArgumentError("loss_and_grad: empty batch");
  if (actions.size() != batch || targets.size() != batch)
    throw DimensionError("loss_and_grad: actions/targets length does not match batch");
  if (static_cast<std::size_t>(inputs.rows()) != params.input_size())
    throw DimensionError("loss_and_grad: input rows do not match network input");

  const std::size_t depth = params.layers.size();
  // activations[l] is the input to layer l; activations[depth] is the output.
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(depth + 1);
  activations.push_back(inputs);
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd z = layer.weight * activations.back();
    z.colwise() += layer.bias;
    activations.push_back(activate(std::move(z), layer.activation));
  }

  const auto& out = activations.back();
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(out.rows(), out.cols());
  double loss = 0.0;
  const double k = static_cast<double>(batch);
  for (std::size_t i = 0; i < batch; ++i) {
    const int a = actions[i];
    if (a < 0 || a >= out.rows()) throw ArgumentError("loss_and_grad: action index out of range");
    const auto col = static_cast<Eigen::Index>(i);
    const double residual = out(a, col) - targets[i];
    loss += residual * residual;
    delta(a, col) = 2.0 * residual / k;
  }
  loss /= k;

  LossAndGrad result;
  result.loss = loss;
  result.grads.weight.resize(depth);
  result.grads.bias.resize(depth);
  for (std::size_t l = depth; l-- > 0;) {
    const auto& layer = params.layers[l];
    if (layer.activation == Activation::Relu) {
      // Output of a rectifier is positive exactly where the pre-activation was.
      delta = delta.cwiseProduct((activations[l + 1].array() > 0.0).cast<double>().matrix());
    }
    result.grads.weight[l] = delta * activations[l].transpose();
    result.grads.bias[l] = delta.rowwise().sum();
    if (l > 0) delta = layer.weight.transpose() * delta;
  }
  return result;
}

OptimizerState make_optimizer(const NetworkParams& params, const AdamConfig& config) {
  OptimizerState state;
  state.config = config;
  state.first_moment = zeros_like(params);
  state.second_moment = zeros_like(params);
  return state;
}

void optimizer_step(NetworkParams& params, const GradientSet& grads, OptimizerState& state) {
  check_congruent(params, grads, "optimizer_step");
  check_congruent(params, state.first_moment, "optimizer_step");
  check_congruent(params, state.second_moment, "optimizer_step");
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  auto apply = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.learning_rate * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    apply(params.layers[l].weight, grads.weight[l], state.first_moment.weight[l], state.second_moment.weight[l]);
    apply(params.layers[l].bias, grads.bias[l], state.first_moment.bias[l], state.second_moment.bias[l]);
  }
}

void soft_update(NetworkParams& target, const NetworkParams& online, double tau) {
  if (!target.same_shape(online)) throw DimensionError("soft_update: network shapes differ");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ArgumentError("soft_update: tau must be in [0, 1]");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto& t = target.layers[l];
    const auto& o = online.layers[l];
    t.weight = tau * o.weight + (1.0 - tau) * t.weight;
    t.bias = tau * o.bias + (1.0 - tau) * t.bias;
  }
}

}  // namespace pomfq
