#include "pomfq/ising.hpp"

#include <algorithm>
#include <cmath>

#include "pomfq/errors.hpp"
#include "pomfq/group_learner.hpp"

namespace pomfq {

std::array<std::size_t, 4> IsingState::neighbors(std::size_t site) const {
  const std::size_t r = site / side;
  const std::size_t c = site % side;
  return {((r + side - 1) % side) * side + c, ((r + 1) % side) * side + c, r * side + (c + side - 1) % side,
          r * side + (c + 1) % side};
}

IsingState make_ising(std::size_t side, double temperature, Rng& rng) {
  if (side < 3) throw ArgumentError("make_ising: lattice side must be at least 3");
  IsingState s;
  s.side = side;
  s.temperature = temperature;
  s.spins.resize(side * side);
  for (int& spin : s.spins) spin = static_cast<int>(rng.uniform_index(2));
  return s;
}

double ising_reward(int same_direction) {
  if (same_direction < 0 || same_direction > 4) throw ArgumentError("ising_reward: neighbor count must be in 0..4");
  return -2.0 + same_direction;
}

std::vector<double> ising_step(IsingState& state, std::span<const int> joint) {
  if (joint.size() != state.size()) throw DimensionError("ising_step: one spin per site required");
  for (int s : joint)
    if (s != 0 && s != 1) throw ArgumentError("ising_step: spins must be 0 or 1");
  state.spins.assign(joint.begin(), joint.end());
  std::vector<double> rewards(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    int same = 0;
    for (std::size_t nb : state.neighbors(i)) same += state.spins[nb] == state.spins[i] ? 1 : 0;
    rewards[i] = ising_reward(same);
  }
  return rewards;
}

NashReference nash_q_reference() {
  // Audit one site of a small torus against an all-up field.
  Rng unused(0);
  IsingState field = make_ising(3, 1.0, unused);
  std::fill(field.spins.begin(), field.spins.end(), 0);
  const std::size_t probe = 4;
  std::array<double, 2> reply{};
  for (int a = 0; a < 2; ++a) {
    std::vector<int> joint(field.size(), 0);
    joint[probe] = a;
    reply[static_cast<std::size_t>(a)] = ising_step(field, joint)[probe];
  }
  NashReference ref;
  ref.aligned = reply[0];
  ref.deviate = reply[1];
  ref.equilibrium = ref.aligned >= ref.deviate;
  return ref;
}

BoundEstimate estimate_bound_D(const TabularQ& table, std::uint64_t n, double delta) {
  if (n == 0) throw ArgumentError("estimate_bound_D: n must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("estimate_bound_D: delta must be in (0, 1)");
  BoundEstimate b;
  b.z = static_cast<double>(table.num_actions()) * std::log(2.0 / delta) / (2.0 * static_cast<double>(n));
  double gap = 0.0;
  for (const auto& [key, q] : table.entries()) {
    const auto [lo, hi] = std::minmax_element(q.begin(), q.end());
    gap = std::max(gap, *hi - *lo);
  }
  b.k = gap / std::sqrt(2.0);
  b.d = b.z + gap;
  return b;
}

double nash_mse(const IsingState& state, std::span<const std::vector<double>> site_qvalues) {
  if (site_qvalues.size() != state.size()) throw DimensionError("nash_mse: one Q vector per site required");
  const NashReference ref = nash_q_reference();
  double total = 0.0;
  for (std::size_t i = 0; i < state.size(); ++i) {
    int up = 0;
    for (std::size_t nb : state.neighbors(i)) up += state.spins[nb] == 0 ? 1 : 0;
    const int aligned = up > 2 ? 0 : up < 2 ? 1 : state.spins[i];
    const auto& q = site_qvalues[i];
    double err = 0.0;
    for (int a = 0; a < 2; ++a) {
      const double target = a == aligned ? ref.aligned : ref.deviate;
      const double diff = q[static_cast<std::size_t>(a)] - target;
      err += diff * diff;
    }
    total += err / 2.0;
  }
  return total / static_cast<double>(state.size());
}

namespace {

double current_mse(const IsingState& state, const GroupLearner& learner) {
  std::vector<std::vector<double>> q(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) q[i] = q_values(learner.backend(), learner.query(i, {}));
  return nash_mse(state, q);
}

}  // namespace

BoundReport run_ising_pomfq(const IsingConfig& config) {
  if (config.stages_per_episode == 0) throw ArgumentError("run_ising_pomfq: need at least one stage per episode");
  const Rng root(config.seed);
  Rng init = root.split(0);
  Rng act = root.split(1);
  Rng train = root.split(2);
  Rng lattice = root.split(3);

  LearnerConfig lc;
  lc.algorithm = Algorithm::POMFQ_FOR;
  lc.backend = BackendKind::Tabular;
  lc.num_actions = 2;
  lc.observation_size = 0;
  lc.tabular_alpha = config.alpha;
  lc.batch_size = config.batch_size;
  lc.replay_capacity = config.replay_capacity;
  lc.mean_action_samples = config.dirichlet_samples;
  lc.mean_action_bins = config.mean_action_bins;
  lc.schedule = TemperatureSchedule{config.temperature, config.temperature, 1};

  IsingState state = make_ising(config.side, config.temperature, lattice);
  GroupLearner learner(lc, state.size(), init);

  BoundReport report;
  report.mse.reserve(config.episodes);
  report.d_trajectory.reserve(config.episodes);
  std::vector<int> previous(state.size(), -1);
  std::vector<int> joint(state.size());
  std::vector<int> seen(4);
  for (std::uint64_t ep = 0; ep < config.episodes; ++ep) {
    learner.begin_episode(ep);
    report.mse.push_back(current_mse(state, learner));
    report.d_trajectory.push_back(
        estimate_bound_D(std::get<TabularQ>(learner.backend()), config.dirichlet_samples, config.delta).d);
    for (std::size_t stage = 0; stage < config.stages_per_episode; ++stage) {
      for (std::size_t i = 0; i < state.size(); ++i) joint[i] = learner.select_action(i, {}, act);
      for (std::size_t i = 0; i < state.size(); ++i) {
        const auto nb = state.neighbors(i);
        for (std::size_t k = 0; k < 4; ++k) seen[k] = previous[nb[k]];
        learner.update_beliefs(i, seen, {}, act);
      }
      const auto rewards = ising_step(state, joint);
      // Each stage game is a complete (terminal) transition of the stateless game.
      for (std::size_t i = 0; i < state.size(); ++i) learner.store(learner.make_experience(i, {}, joint[i], rewards[i], {}, true));
      previous = joint;
    }
    learner.train(train);
  }
  const auto& table = std::get<TabularQ>(learner.backend());
  report.bound = estimate_bound_D(table, config.dirichlet_samples, config.delta);
  report.final_mse = current_mse(state, learner);
  return report;
}

std::vector<double> smooth(std::span<const double> values, std::size_t window) {
  if (window == 0) throw ArgumentError("smooth: window must be positive");
  std::vector<double> out(values.size());
  const std::size_t half = window / 2;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(values.size(), i + window - half);
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += values[j];
    out[i] = s / static_cast<double>(hi - lo);
  }
  return out;
}

}  // namespace pomfq
