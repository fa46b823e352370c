#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pomfq/belief.hpp"
#include "pomfq/rng.hpp"

namespace pomfq {

/// One transition with the mean-action (and visibility-rate) estimate that
/// was current when it was stored. Targets reuse these stored estimates.
struct Experience {
  std::vector<double> observation;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_observation;
  MeanAction mean_action;
  std::optional<double> lambda_bar;
  bool terminal = false;

  friend bool operator==(const Experience&, const Experience&) = default;
};

/// Fixed-capacity ring; once full, each push overwrites the oldest entry.
class ReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 1024;

  explicit ReplayBuffer(std::size_t capacity = kDefaultCapacity);

  void push(Experience exp);
  /// k draws uniformly with replacement. Throws StateError when empty.
  std::vector<const Experience*> sample(std::size_t k, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  std::size_t cursor() const { return cursor_; }

  /// Storage order (not insertion order once the ring has wrapped).
  const std::vector<Experience>& items() const { return items_; }
  /// Rebuild from serialized storage.
  void restore(std::vector<Experience> items, std::size_t cursor);

  friend bool operator==(const ReplayBuffer&, const ReplayBuffer&) = default;

 private:
  std::size_t capacity_;
  std::size_t cursor_ = 0;
  std::vector<Experience> items_;
};

}  // namespace pomfq
