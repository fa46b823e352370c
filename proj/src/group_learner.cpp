#include "pomfq/group_learner.hpp"

#include <string>

#include "pomfq/errors.hpp"

namespace pomfq {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::IL: return "il";
    case Algorithm::MFQ: return "mfq";
    case Algorithm::POMFQ_FOR: return "pomfq_for";
    case Algorithm::POMFQ_PDO: return "pomfq_pdo";
  }
  return "?";
}

std::string_view to_string(BackendKind b) { return b == BackendKind::Tabular ? "tabular" : "neural"; }

Algorithm parse_algorithm(std::string_view s) {
  if (s == "il") return Algorithm::IL;
  if (s == "mfq") return Algorithm::MFQ;
  if (s == "pomfq_for") return Algorithm::POMFQ_FOR;
  if (s == "pomfq_pdo") return Algorithm::POMFQ_PDO;
  throw ArgumentError("unknown algorithm '" + std::string(s) + "'");
}

BackendKind parse_backend(std::string_view s) {
  if (s == "tabular") return BackendKind::Tabular;
  if (s == "neural") return BackendKind::Neural;
  throw ArgumentError("unknown backend '" + std::string(s) + "'");
}

bool uses_mean_action(Algorithm a) { return a != Algorithm::IL; }
bool uses_lambda(Algorithm a) { return a == Algorithm::POMFQ_PDO; }

InputLayout input_layout(const LearnerConfig& config) {
  return InputLayout{config.observation_size, uses_mean_action(config.algorithm) ? config.num_actions : 0,
                     uses_lambda(config.algorithm)};
}

namespace {

QBackend make_backend(const LearnerConfig& config, Rng& rng) {
  if (config.backend == BackendKind::Tabular)
    return TabularQ(config.num_actions, config.mean_action_bins, config.lambda_bins);
  return make_neural_q(input_layout(config), config.num_actions, config.hidden, config.adam, rng);
}

}  // namespace

GroupLearner::GroupLearner(LearnerConfig config, std::size_t num_agents, Rng& init_rng)
    : config_(std::move(config)),
      backend_(make_backend(config_, init_rng)),
      replay_(config_.replay_capacity),
      temperature_(config_.schedule.at(0)) {
  if (num_agents == 0) throw ArgumentError("GroupLearner: group must have at least one agent");
  if (config_.batch_size == 0) throw ArgumentError("GroupLearner: batch size must be positive");
  if (!(config_.discount >= 0.0 && config_.discount < 1.0)) throw ArgumentError("GroupLearner: discount must be in [0, 1)");
  const MeanActionBelief prior(config_.num_actions, config_.prior_concentration);
  const auto visibility = make_visibility_prior(config_.gamma_prior_shape, config_.gamma_prior_rate);
  beliefs_.assign(num_agents, AgentBelief{prior, visibility, prior.mean()});
}

void GroupLearner::begin_episode(std::uint64_t episode) { set_temperature(config_.schedule.at(episode)); }

void GroupLearner::set_temperature(double t) {
  if (!(t > 0.0)) throw ArgumentError("GroupLearner: temperature must be positive");
  temperature_ = t;
}

QQuery GroupLearner::query(std::size_t agent, std::span<const double> observation) const {
  const auto& b = beliefs_.at(agent);
  QQuery q;
  q.observation = observation;
  if (uses_mean_action(config_.algorithm)) q.mean_action = b.mean_action;
  if (uses_lambda(config_.algorithm)) q.lambda_bar = b.visibility.lambda_bar;
  return q;
}

std::vector<double> GroupLearner::action_probs(std::size_t agent, std::span<const double> observation) const {
  return boltzmann_probs(q_values(backend_, query(agent, observation)), temperature_);
}

int GroupLearner::select_action(std::size_t agent, std::span<const double> observation, Rng& rng) const {
  return sample_index(action_probs(agent, observation), rng);
}

void GroupLearner::update_beliefs(std::size_t agent, std::span<const int> visible_actions,
                                  std::span<const double> visible_distances, Rng& rng) {
  auto& b = beliefs_.at(agent);
  switch (config_.algorithm) {
    case Algorithm::IL:
      return;
    case Algorithm::MFQ:
      if (auto m = frequentist_mean_action(visible_actions, config_.num_actions)) b.mean_action = std::move(*m);
      return;
    case Algorithm::POMFQ_FOR:
    case Algorithm::POMFQ_PDO: {
      b.dirichlet.update(action_counts(visible_actions, config_.num_actions), config_.count_decay);
      if (config_.algorithm == Algorithm::POMFQ_PDO) {
        for (double d : visible_distances) b.visibility = gamma_posterior_update(b.visibility, d);
      }
      b.mean_action = sample_mean_action(b.dirichlet, config_.mean_action_samples, rng);
      if (config_.algorithm == Algorithm::POMFQ_PDO)
        b.visibility.lambda_bar = sample_lambda(b.visibility, config_.lambda_samples, rng);
      return;
    }
  }
}

Experience GroupLearner::make_experience(std::size_t agent, std::vector<double> observation, int action, double reward,
                                         std::vector<double> next_observation, bool terminal) const {
  const auto& b = beliefs_.at(agent);
  Experience e;
  e.observation = std::move(observation);
  e.action = action;
  e.reward = reward;
  e.next_observation = std::move(next_observation);
  if (uses_mean_action(config_.algorithm)) e.mean_action = b.mean_action;
  if (uses_lambda(config_.algorithm)) e.lambda_bar = b.visibility.lambda_bar;
  e.terminal = terminal;
  return e;
}

namespace {

QQuery stored_query(const Experience& e, bool next) {
  QQuery q;
  q.observation = next ? e.next_observation : e.observation;
  q.mean_action = e.mean_action;
  q.lambda_bar = e.lambda_bar;
  return q;
}

}  // namespace

double GroupLearner::train_minibatch(std::span<const Experience* const> batch) {
  if (batch.empty()) throw ArgumentError("train_minibatch: empty batch");
  const double gamma = config_.discount;

  if (auto* table = std::get_if<TabularQ>(&backend_)) {
    double loss = 0.0;
    for (const Experience* e : batch) {
      const TabularKey key = table->key(stored_query(*e, false));
      const double v_next = e->terminal ? 0.0 : pomf_value(backend_, stored_query(*e, true), temperature_);
      const double y = e->reward + gamma * v_next;
      const double residual = y - table->value(key, e->action);
      loss += residual * residual;
      tabular_td_update(*table, key, e->action, e->reward, v_next, config_.tabular_alpha, gamma);
    }
    return loss / static_cast<double>(batch.size());
  }

  auto& net = std::get<NeuralQ>(backend_);
  const auto k = static_cast<Eigen::Index>(batch.size());
  const auto width = static_cast<Eigen::Index>(net.layout.total());
  Eigen::MatrixXd inputs(width, k);
  Eigen::MatrixXd next_inputs(width, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Experience& e = *batch[static_cast<std::size_t>(i)];
    net.write_input(stored_query(e, false), inputs.col(i));
    net.write_input(stored_query(e, true), next_inputs.col(i));
  }
  const Eigen::MatrixXd next_q = forward_batch(net.target, next_inputs);

  std::vector<int> actions(batch.size());
  std::vector<double> targets(batch.size());
  std::vector<double> column(static_cast<std::size_t>(next_q.rows()));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Experience& e = *batch[static_cast<std::size_t>(i)];
    double y = e.reward;
    if (!e.terminal) {
      for (Eigen::Index a = 0; a < next_q.rows(); ++a) column[static_cast<std::size_t>(a)] = next_q(a, i);
      y += gamma * pomf_value_from(column, temperature_);
    }
    actions[static_cast<std::size_t>(i)] = e.action;
    targets[static_cast<std::size_t>(i)] = y;
  }
  auto [loss, grads] = loss_and_grad(net.online, inputs, actions, targets);
  optimizer_step(net.online, grads, net.optimizer);
  return loss;
}

double GroupLearner::train(Rng& rng) {
  double total = 0.0;
  std::size_t steps = 0;
  if (!replay_.empty()) {
    for (std::size_t j = 0; j < num_agents(); ++j) {
      const auto batch = replay_.sample(config_.batch_size, rng);
      total += train_minibatch(batch);
      ++steps;
    }
  }
  if (auto* net = std::get_if<NeuralQ>(&backend_)) soft_update(net->target, net->online, config_.tau);
  return steps == 0 ? 0.0 : total / static_cast<double>(steps);
}

}  // namespace pomfq
