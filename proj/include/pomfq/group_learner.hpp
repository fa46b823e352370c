#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pomfq/approx.hpp"
#include "pomfq/backend.hpp"
#include "pomfq/belief.hpp"
#include "pomfq/policy.hpp"
#include "pomfq/replay.hpp"
#include "pomfq/rng.hpp"

namespace pomfq {

enum class Algorithm : std::uint8_t {
  IL = 0,         // independent Q-learning, no mean action
  MFQ = 1,        // frequentist mean of visible agents' actions
  POMFQ_FOR = 2,  // Dirichlet-sampled mean action
  POMFQ_PDO = 3,  // POMFQ_FOR plus the Gamma visibility-rate estimate
};

enum class BackendKind : std::uint8_t { Tabular = 0, Neural = 1 };

std::string_view to_string(Algorithm a);
std::string_view to_string(BackendKind b);
Algorithm parse_algorithm(std::string_view s);
BackendKind parse_backend(std::string_view s);

bool uses_mean_action(Algorithm a);
bool uses_lambda(Algorithm a);

struct LearnerConfig {
  Algorithm algorithm = Algorithm::POMFQ_FOR;
  BackendKind backend = BackendKind::Neural;
  std::size_t num_actions = 21;
  std::size_t observation_size = 0;
  std::vector<std::size_t> hidden{64, 64};
  AdamConfig adam{};
  double tabular_alpha = 0.1;
  double discount = 0.95;
  double tau = 0.01;
  std::size_t replay_capacity = ReplayBuffer::kDefaultCapacity;
  std::size_t batch_size = 64;
  std::size_t mean_action_samples = 100;
  std::size_t lambda_samples = 100;
  double count_decay = 1.0;
  double prior_concentration = 1.0;
  double gamma_prior_shape = 1.0;
  double gamma_prior_rate = 1.0;
  std::size_t mean_action_bins = 32;
  std::size_t lambda_bins = 16;
  TemperatureSchedule schedule{};
};

/// Per-agent estimates. `mean_action` is ã for the POMFQ variants and the
/// frequentist ā for MFQ; it starts uniform.
struct AgentBelief {
  MeanActionBelief dirichlet;
  VisibilityBelief visibility;
  MeanAction mean_action;

  friend bool operator==(const AgentBelief&, const AgentBelief&) = default;
};

/// A group of agents sharing one Q backend and one replay buffer, each agent
/// with its own beliefs.
class GroupLearner {
 public:
  GroupLearner(LearnerConfig config, std::size_t num_agents, Rng& init_rng);

  const LearnerConfig& config() const { return config_; }
  Algorithm algorithm() const { return config_.algorithm; }
  std::size_t num_agents() const { return beliefs_.size(); }
  std::size_t num_actions() const { return config_.num_actions; }

  /// Sets the exploration temperature for `episode` from the schedule.
  void begin_episode(std::uint64_t episode);
  double temperature() const { return temperature_; }
  void set_temperature(double t);

  /// The conditioning this agent currently acts on.
  QQuery query(std::size_t agent, std::span<const double> observation) const;
  std::vector<double> action_probs(std::size_t agent, std::span<const double> observation) const;
  int select_action(std::size_t agent, std::span<const double> observation, Rng& rng) const;

  /// Absorb what the agent saw this step: Dirichlet counts from the visible
  /// agents' previous actions, then ã re-sampling (POMFQ); Gamma updates per
  /// visible distance and λ̄ re-sampling (PDO); frequentist ā (MFQ).
  void update_beliefs(std::size_t agent, std::span<const int> visible_actions, std::span<const double> visible_distances,
                      Rng& rng);

  /// Experience stamped with the agent's current estimates.
  Experience make_experience(std::size_t agent, std::vector<double> observation, int action, double reward,
                             std::vector<double> next_observation, bool terminal) const;
  void store(Experience exp) { replay_.push(std::move(exp)); }

  /// One optimization step on `batch` with targets r + γ v(s') computed from
  /// the stored estimates. Returns the batch loss before the step.
  double train_minibatch(std::span<const Experience* const> batch);

  /// End-of-episode training: one minibatch per agent in the group, then the
  /// soft target update. Returns the mean minibatch loss (0 with an empty buffer).
  double train(Rng& rng);

  QBackend& backend() { return backend_; }
  const QBackend& backend() const { return backend_; }
  ReplayBuffer& replay() { return replay_; }
  const ReplayBuffer& replay() const { return replay_; }
  std::vector<AgentBelief>& beliefs() { return beliefs_; }
  const std::vector<AgentBelief>& beliefs() const { return beliefs_; }

 private:
  LearnerConfig config_;
  QBackend backend_;
  ReplayBuffer replay_;
  std::vector<AgentBelief> beliefs_;
  double temperature_;
};

InputLayout input_layout(const LearnerConfig& config);

}  // namespace pomfq
