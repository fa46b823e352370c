#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pomfq/arena.hpp"
#include "pomfq/group_learner.hpp"

namespace pomfq {

struct EpisodeOptions {
  ObservationModel observation;
  /// Store experiences and train after the episode. Off for faceoff games.
  bool learn = true;
  /// Fixed temperature instead of the schedule (greedy evaluation).
  std::optional<double> temperature;
  /// Index into the temperature schedule.
  std::uint64_t episode = 0;
  bool record_events = false;
};

struct GroupMetrics {
  double reward_sum = 0.0;
  int kills = 0;
  std::size_t alive = 0;
  std::size_t experiences = 0;
  double loss = 0.0;
  /// Average number of agents visible to a member per agent-step.
  double mean_visible = 0.0;
};

struct EpisodeMetrics {
  std::array<GroupMetrics, 2> groups;
  std::size_t steps = 0;
  std::vector<Event> events;
};

/// Plays one episode of `env` with learners[g] controlling group g.
///
/// Per step, in order: every alive agent samples an action from its
/// Boltzmann policy given its current estimates; every agent folds the
/// previous actions (and, for the distance-aware variant, the distances) of
/// the agents it sees into its beliefs and re-samples its estimates; the
/// joint action is executed; each agent's transition is stored together with
/// its fresh estimates. After the last step each learning group trains one
/// minibatch per member and blends its target network.
///
/// Observation draws use `env.rng`; action and belief sampling use
/// `act_rng`; minibatch sampling uses `train_rng`.
EpisodeMetrics run_episode(ArenaState& env, std::array<GroupLearner*, 2> learners, const EpisodeOptions& options,
                           Rng& act_rng, Rng& train_rng);

}  // namespace pomfq
