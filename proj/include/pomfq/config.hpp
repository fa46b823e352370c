#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pomfq/arena.hpp"
#include "pomfq/group_learner.hpp"

namespace pomfq {

/// One training run. Units are in the key names of the text form; counts
/// are episodes, steps, agents or samples.
struct RunConfig {
  GameId game = GameId::Multibattle;
  ObservationModel::Mode observation = ObservationModel::Mode::FOR;
  double for_radius_cells = 6.0;  // 0 = each role's own view range
  double pdo_lambda = 1.0;
  std::array<Algorithm, 2> algorithm{Algorithm::POMFQ_FOR, Algorithm::POMFQ_FOR};
  std::uint64_t episodes = 3000;  // also the temperature-schedule horizon
  std::size_t max_steps = 500;
  std::array<std::size_t, 2> agents{25, 25};
  int map_width_cells = 40;
  int map_height_cells = 40;
  std::size_t food_count = 0;
  BackendKind backend = BackendKind::Neural;
  double learning_rate = 1e-4;
  double tabular_alpha = 0.1;
  double discount = 0.95;
  std::size_t replay_capacity = 1024;
  std::size_t batch_size = 64;
  std::size_t mean_action_samples = 100;
  std::size_t lambda_samples = 100;
  double temperature_initial = 1.0;
  double temperature_final = 0.01;
  double soft_update_tau = 0.01;
  double count_decay = 1.0;
  std::vector<std::size_t> hidden_units{64, 64};
  std::uint64_t seed = 0;
  std::size_t replicas = 1;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Defaults for a game and observation mode: populations, map, food and the
/// episode budget (3000 under FOR, 2000 under PDO).
RunConfig default_run_config(GameId game, ObservationModel::Mode mode = ObservationModel::Mode::FOR);

/// Parses `key = value` lines; '#' starts a comment. `game` and
/// `observation` select the defaults the other keys override, wherever they
/// appear. `algorithm` sets both groups. Unknown keys, malformed values and
/// failed validation raise ConfigError naming the key.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::string& path);

/// Throws ConfigError on non-positive counts, out-of-range rates or a
/// distance-aware algorithm without distance-based observation.
void validate(const RunConfig& config);

/// Every key in a fixed order; parse_run_config(canonical_text(c)) == c.
std::string canonical_text(const RunConfig& config);
std::uint64_t config_hash(const RunConfig& config);

GameSpec game_spec(const RunConfig& config, std::uint64_t seed);
ObservationModel observation_model(const RunConfig& config);
LearnerConfig learner_config(const RunConfig& config, int group);

}  // namespace pomfq
