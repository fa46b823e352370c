#include "pomfq/backend.hpp"

#include <algorithm>
#include <cmath>

#include "pomfq/errors.hpp"
#include "pomfq/policy.hpp"
#include "pomfq/rng.hpp"

namespace pomfq {

std::size_t mean_action_bin(double component, std::size_t bins) {
  const double scaled = std::floor(std::clamp(component, 0.0, 1.0) * static_cast<double>(bins));
  return std::min(static_cast<std::size_t>(scaled), bins - 1);
}

std::int16_t lambda_bin(double lambda, std::size_t bins) {
  const auto top = static_cast<double>(bins) - 1.0;
  if (!(lambda > 0.0)) return 0;
  const double b = top + std::ceil(std::log2(lambda / 4.0));
  return static_cast<std::int16_t>(std::clamp(b, 0.0, top));
}

std::uint64_t observation_key(std::span<const double> observation) {
  std::uint64_t h = 0;
  for (double x : observation) {
    const auto q = static_cast<std::int64_t>(std::llround(x * 1e6));
    h = mix64(h ^ static_cast<std::uint64_t>(q)) + 0x9e3779b97f4a7c15ULL;
  }
  return h;
}

TabularQ::TabularQ(std::size_t num_actions, std::size_t mean_action_bins, std::size_t lambda_bins)
    : num_actions_(num_actions), mean_action_bins_(mean_action_bins), lambda_bins_(lambda_bins) {
  if (num_actions == 0) throw ArgumentError("TabularQ: empty action set");
  if (mean_action_bins == 0 || mean_action_bins > 256 || lambda_bins == 0)
    throw ArgumentError("TabularQ: bin counts must be in [1, 256]");
}

TabularKey TabularQ::key(const QQuery& query) const {
  TabularKey k;
  k.state = observation_key(query.observation);
  k.mean_action_bins.reserve(query.mean_action.size());
  for (double m : query.mean_action) k.mean_action_bins.push_back(static_cast<std::uint8_t>(mean_action_bin(m, mean_action_bins_)));
  if (query.lambda_bar) k.lambda_bin = lambda_bin(*query.lambda_bar, lambda_bins_);
  return k;
}

std::vector<double> TabularQ::values(const TabularKey& key) const {
  const auto it = table_.find(key);
  if (it == table_.end()) return std::vector<double>(num_actions_, 0.0);
  return it->second;
}

double TabularQ::value(const TabularKey& key, int action) const {
  const auto it = table_.find(key);
  return it == table_.end() ? 0.0 : it->second.at(static_cast<std::size_t>(action));
}

void TabularQ::set_value(const TabularKey& key, int action, double q) {
  if (action < 0 || static_cast<std::size_t>(action) >= num_actions_) throw ArgumentError("TabularQ: action out of range");
  auto [it, inserted] = table_.try_emplace(key, num_actions_, 0.0);
  it->second[static_cast<std::size_t>(action)] = q;
}

void NeuralQ::write_input(const QQuery& query, Eigen::Ref<Eigen::VectorXd> out) const {
  if (query.observation.size() != layout.observation_size || query.mean_action.size() != layout.mean_action_size ||
      query.lambda_bar.has_value() != layout.uses_lambda)
    throw DimensionError("NeuralQ: query does not match the network input layout");
  Eigen::Index i = 0;
  for (double x : query.observation) out(i++) = x;
  for (double x : query.mean_action) out(i++) = x;
  if (query.lambda_bar) out(i++) = *query.lambda_bar;
}

Eigen::VectorXd NeuralQ::input(const QQuery& query) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(layout.total()));
  write_input(query, x);
  return x;
}

NeuralQ make_neural_q(const InputLayout& layout, std::size_t num_actions, std::span<const std::size_t> hidden,
                      const AdamConfig& adam, Rng& rng) {
  NeuralQ q;
  q.layout = layout;
  q.online = make_network(layout.total(), hidden, num_actions, rng);
  q.target = q.online;
  q.optimizer = make_optimizer(q.online, adam);
  return q;
}

std::size_t num_actions(const QBackend& backend) {
  return std::visit(
      [](const auto& b) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(b)>, TabularQ>)
          return b.num_actions();
        else
          return b.online.output_size();
      },
      backend);
}

namespace {

std::vector<double> evaluate(const QBackend& backend, const QQuery& query, bool use_target) {
  if (const auto* table = std::get_if<TabularQ>(&backend)) return table->values(table->key(query));
  const auto& net = std::get<NeuralQ>(backend);
  const Eigen::VectorXd out = forward(use_target ? net.target : net.online, net.input(query));
  return {out.data(), out.data() + out.size()};
}

}  // namespace

std::vector<double> q_values(const QBackend& backend, const QQuery& query) { return evaluate(backend, query, false); }

std::vector<double> target_q_values(const QBackend& backend, const QQuery& query) {
  return evaluate(backend, query, true);
}

double pomf_value_from(std::span<const double> qvalues, double temperature) {
  const auto pi = boltzmann_probs(qvalues, temperature);
  return expected_value(pi, qvalues);
}

double pomf_value(const QBackend& backend, const QQuery& next, double temperature) {
  const auto q = target_q_values(backend, next);
  return pomf_value_from(q, temperature);
}

void tabular_td_update(TabularQ& table, const TabularKey& key, int action, double reward, double next_value,
                       double alpha, double gamma) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("tabular_td_update: alpha must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ArgumentError("tabular_td_update: gamma must be in [0, 1)");
  const double q = table.value(key, action);
  table.set_value(key, action, (1.0 - alpha) * q + alpha * (reward + gamma * next_value));
}

}  // namespace pomfq
