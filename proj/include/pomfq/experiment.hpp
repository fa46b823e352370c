#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pomfq/checkpoint.hpp"
#include "pomfq/config.hpp"
#include "pomfq/episode.hpp"

namespace pomfq {

inline constexpr const char* kTrainCsvHeader = "episode,replica,group,reward_sum,kills,alive,wall_ms";
inline constexpr const char* kFaceoffCsvHeader = "pairing,wins_a,wins_b,draws,fisher_p";
inline constexpr const char* kIsingCsvHeader = "episode,mse,d_bound";
inline constexpr const char* kAblateCsvHeader = "radius,episode,replica,group,reward_sum,kills,alive,wall_ms";
inline constexpr const char* kTtestCsvHeader = "episode,radius_a,radius_b,t,df,p";

struct TrainRow {
  std::uint64_t episode = 0;
  std::uint64_t replica = 0;
  int group = 0;
  double reward_sum = 0.0;
  int kills = 0;
  std::size_t alive = 0;
  double wall_ms = 0.0;
};

std::string format_train_row(const TrainRow& row);
/// Parses the body of a train.csv (header included).
std::vector<TrainRow> parse_train_csv(const std::string& text);

/// Replica i's root stream: the master seed's generator split at i.
Rng replica_root(std::uint64_t master_seed, std::uint64_t replica);
/// Fresh learners and streams for replica `replica`.
ReplicaState make_replica(const RunConfig& config, std::uint64_t replica);
/// The arena seed for one episode of one replica.
std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t replica, std::uint64_t episode);

/// Runs `episodes` more episodes of one replica, appending one row per group per episode.
void advance_replica(const RunConfig& config, ReplicaState& state, std::uint64_t episodes, bool wall_clock,
                     std::vector<TrainRow>& rows);

struct TrainOptions {
  std::filesystem::path out_dir = ".";
  /// Episodes to run in this invocation; the configured count when unset.
  std::optional<std::uint64_t> episodes;
  /// Continue from the checkpoints in `out_dir` and append to its CSVs.
  bool resume = false;
  /// Write wall_ms = 0 so the CSV depends only on the seed.
  bool wall_clock = true;
  std::size_t threads = 0;  // 0 = hardware concurrency
};

struct TrainSummary {
  std::vector<TrainRow> rows;  // this invocation only
  std::vector<std::filesystem::path> checkpoints;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::uint64_t replica);

/// Trains `config.replicas` independent replicas. Each replica writes
/// train_r{i}.csv and checkpoint_r{i}.bin; train.csv is rebuilt afterwards
/// from the per-replica files, ordered by (episode, replica, group).
TrainSummary run_training(const RunConfig& config, const TrainOptions& options);

struct FaceoffResult {
  std::uint64_t games = 0;
  std::uint64_t wins_a = 0;
  std::uint64_t wins_b = 0;
  std::uint64_t draws = 0;
  double fisher_p = 1.0;
};

/// Side of the winning group, or nullopt for a draw: more survivors wins,
/// then higher total reward; Predator-Prey ties stay draws.
std::optional<int> game_winner(GameId game, const EpisodeMetrics& metrics);

/// Greedy, non-learning games between two trained checkpoints. The first
/// half pits A's group-A learner against B's group-B learner, the second
/// half B's group-A learner against A's group-B learner.
FaceoffResult run_faceoff(const Checkpoint& a, const Checkpoint& b, std::uint64_t games, std::uint64_t seed,
                          std::size_t threads = 0);
FaceoffResult run_faceoff(const std::filesystem::path& a, const std::filesystem::path& b, std::uint64_t games,
                          std::uint64_t seed, std::size_t threads = 0);

/// Throws ConfigError unless the two configurations describe the same arena.
void check_compatible(const RunConfig& a, const RunConfig& b);

struct AblationOptions {
  std::vector<double> radii{2, 4, 6, 8, 10};
  TrainOptions train;
  /// Episode whose group-A rewards are compared across radii with Welch tests.
  std::optional<std::uint64_t> ttest_episode;
};

struct AblationResult {
  std::vector<double> radii;
  std::vector<std::vector<TrainRow>> rows;  // per radius
};

/// One training run per radius (same base seed) under out_dir/radius_{r};
/// the merged ablate.csv is keyed by radius.
AblationResult run_ablation(const RunConfig& config, const AblationOptions& options);

/// Runs `jobs` tasks on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& task);

std::string format_number(double v);

}  // namespace pomfq
