#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pomfq/approx.hpp"

namespace pomfq {

/// Everything a Q backend conditions on: the local observation, the
/// mean-action estimate (empty for independent learners) and, for the
/// distance-aware variant, the sampled visibility rate.
struct QQuery {
  std::span<const double> observation;
  std::span<const double> mean_action;
  std::optional<double> lambda_bar;
};

struct TabularKey {
  std::uint64_t state = 0;
  std::vector<std::uint8_t> mean_action_bins;
  std::int16_t lambda_bin = -1;  // -1 when lambda is not part of the key

  auto operator<=>(const TabularKey&) const = default;
};

std::size_t mean_action_bin(double component, std::size_t bins);
/// Log-spaced (halving) bins over (0, 4]; values above 4 land in the top bin.
std::int16_t lambda_bin(double lambda, std::size_t bins);
/// Hash of the observation quantized to 1e-6; the empty observation maps to 0.
std::uint64_t observation_key(std::span<const double> observation);

/// Lookup table Q(s, ã-bin[, λ̄-bin]) -> action values; unseen keys read as zero.
class TabularQ {
 public:
  explicit TabularQ(std::size_t num_actions, std::size_t mean_action_bins = 32, std::size_t lambda_bins = 16);

  std::size_t num_actions() const { return num_actions_; }
  std::size_t mean_action_bins() const { return mean_action_bins_; }
  std::size_t lambda_bins() const { return lambda_bins_; }

  TabularKey key(const QQuery& query) const;
  std::vector<double> values(const TabularKey& key) const;
  double value(const TabularKey& key, int action) const;
  void set_value(const TabularKey& key, int action, double q);

  const std::map<TabularKey, std::vector<double>>& entries() const { return table_; }
  std::map<TabularKey, std::vector<double>>& entries() { return table_; }

  friend bool operator==(const TabularQ&, const TabularQ&) = default;

 private:
  std::size_t num_actions_;
  std::size_t mean_action_bins_;
  std::size_t lambda_bins_;
  std::map<TabularKey, std::vector<double>> table_;
};

struct InputLayout {
  std::size_t observation_size = 0;
  std::size_t mean_action_size = 0;
  bool uses_lambda = false;

  std::size_t total() const { return observation_size + mean_action_size + (uses_lambda ? 1 : 0); }
  friend bool operator==(const InputLayout&, const InputLayout&) = default;
};

/// Online/target network pair with the online network's optimizer state.
struct NeuralQ {
  InputLayout layout;
  NetworkParams online;
  NetworkParams target;
  OptimizerState optimizer;

  /// observation ++ mean_action ++ [lambda_bar]
  void write_input(const QQuery& query, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd input(const QQuery& query) const;
};

NeuralQ make_neural_q(const InputLayout& layout, std::size_t num_actions, std::span<const std::size_t> hidden,
                      const AdamConfig& adam, Rng& rng);

using QBackend = std::variant<TabularQ, NeuralQ>;

std::size_t num_actions(const QBackend& backend);

/// Q(s, ·, ã[, λ̄]) from the online network (or the table).
std::vector<double> q_values(const QBackend& backend, const QQuery& query);
/// Same, from the target network; tables have no separate target.
std::vector<double> target_q_values(const QBackend& backend, const QQuery& query);

/// v = sum_a pi(a | s') Q(s', a) with pi the Boltzmann policy over the target
/// values at `temperature`.
double pomf_value(const QBackend& backend, const QQuery& next, double temperature);
double pomf_value_from(std::span<const double> qvalues, double temperature);

/// Q <- (1 - alpha) Q + alpha (r + gamma v').
void tabular_td_update(TabularQ& table, const TabularKey& key, int action, double reward, double next_value,
                       double alpha, double gamma);

}  // namespace pomfq
