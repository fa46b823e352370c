#include "pomfq/episode.hpp"

#include <string>

#include "pomfq/errors.hpp"

namespace pomfq {

EpisodeMetrics run_episode(ArenaState& env, std::array<GroupLearner*, 2> learners, const EpisodeOptions& options,
                           Rng& act_rng, Rng& train_rng) {
  const std::size_t n = env.entities.size();
  const std::size_t obs_size = observation_size(env.game);
  std::vector<std::size_t> local(n);
  std::array<std::size_t, 2> counts{0, 0};
  for (const auto& e : env.entities) local[static_cast<std::size_t>(e.id)] = counts[static_cast<std::size_t>(e.group)]++;
  for (std::size_t g = 0; g < 2; ++g) {
    if (learners[g] == nullptr) throw ArgumentError("run_episode: missing learner for group " + std::to_string(g));
    if (learners[g]->num_agents() != counts[g])
      throw ArgumentError("run_episode: learner size does not match group " + std::to_string(g));
    if (options.temperature)
      learners[g]->set_temperature(*options.temperature);
    else
      learners[g]->begin_episode(options.episode);
  }
  auto learner_of = [&](const Entity& e) -> GroupLearner& { return *learners[static_cast<std::size_t>(e.group)]; };

  EpisodeMetrics metrics;
  std::array<double, 2> visible_sum{0.0, 0.0};
  std::array<std::size_t, 2> agent_steps{0, 0};

  std::vector<Observation> obs(n);
  for (const auto& e : env.entities)
    if (e.alive) obs[static_cast<std::size_t>(e.id)] = observe(env, e.id, options.observation, env.rng);

  std::vector<int> actions(n, 0);
  std::vector<Observation> next(n);
  while (!is_done(env)) {
    for (const auto& e : env.entities) {
      if (!e.alive) continue;
      const auto id = static_cast<std::size_t>(e.id);
      actions[id] = learner_of(e).select_action(local[id], obs[id].features, act_rng);
    }
    for (const auto& e : env.entities) {
      if (!e.alive) continue;
      const auto id = static_cast<std::size_t>(e.id);
      learner_of(e).update_beliefs(local[id], obs[id].visible_actions, obs[id].visible_distances, act_rng);
      visible_sum[static_cast<std::size_t>(e.group)] += static_cast<double>(obs[id].visible_ids.size());
      ++agent_steps[static_cast<std::size_t>(e.group)];
    }

    std::vector<char> acted(n, 0);
    for (const auto& e : env.entities) acted[static_cast<std::size_t>(e.id)] = e.alive ? 1 : 0;

    StepResult result = step(env, actions, options.record_events);
    ++metrics.steps;
    const bool wiped_out = env.alive_count(0) == 0 || env.alive_count(1) == 0;

    for (const auto& e : env.entities) {
      const auto id = static_cast<std::size_t>(e.id);
      if (!acted[id]) continue;
      auto& gm = metrics.groups[static_cast<std::size_t>(e.group)];
      gm.reward_sum += result.rewards[id];
      if (e.alive) next[id] = observe(env, e.id, options.observation, env.rng);
      if (options.learn) {
        std::vector<double> next_features = e.alive ? next[id].features : std::vector<double>(obs_size, 0.0);
        const bool terminal = !e.alive || wiped_out;
        auto& learner = learner_of(e);
        learner.store(learner.make_experience(local[id], obs[id].features, actions[id], result.rewards[id],
                                              std::move(next_features), terminal));
        ++gm.experiences;
      }
    }
    for (std::size_t g = 0; g < 2; ++g) metrics.groups[g].kills += result.kills[g];
    if (options.record_events)
      metrics.events.insert(metrics.events.end(), result.events.begin(), result.events.end());
    std::swap(obs, next);
  }

  for (std::size_t g = 0; g < 2; ++g) {
    auto& gm = metrics.groups[g];
    gm.alive = env.alive_count(static_cast<int>(g));
    gm.mean_visible = agent_steps[g] == 0 ? 0.0 : visible_sum[g] / static_cast<double>(agent_steps[g]);
    if (options.learn && metrics.steps > 0) gm.loss = learners[g]->train(train_rng);
  }
  return metrics;
}

}  // namespace pomfq
