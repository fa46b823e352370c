#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pomfq/config.hpp"
#include "pomfq/group_learner.hpp"
#include "pomfq/rng.hpp"
#include "pomfq/serialize.hpp"

namespace pomfq {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything one training replica needs to continue exactly where it stopped.
struct ReplicaState {
  std::uint64_t replica = 0;
  std::uint64_t episodes_done = 0;
  Rng act_rng;
  Rng train_rng;
  std::vector<GroupLearner> groups;  // side 0 (group A), side 1 (group B)
};

struct Checkpoint {
  RunConfig config;
  ReplicaState state;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class BadMagicError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class VersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class TruncatedError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class ChecksumError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};
class ConfigMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

void write_learner(ByteWriter& w, const GroupLearner& learner);
GroupLearner read_learner(ByteReader& r, const LearnerConfig& config, std::size_t num_agents);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws BadMagicError, VersionError, TruncatedError, ChecksumError, or
/// ConfigMismatchError when `expected_config_hash` is given and differs.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes,
                             std::optional<std::uint64_t> expected_config_hash = std::nullopt);

/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           std::optional<std::uint64_t> expected_config_hash = std::nullopt);

}  // namespace pomfq
