#include "pomfq/replay.hpp"

#include "pomfq/errors.hpp"

namespace pomfq {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ArgumentError("ReplayBuffer: capacity must be positive");
  items_.reserve(capacity);
}

void ReplayBuffer::push(Experience exp) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(exp));
    cursor_ = items_.size() % capacity_;
    return;
  }
  items_[cursor_] = std::move(exp);
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t k, Rng& rng) const {
  if (items_.empty()) throw StateError("ReplayBuffer: cannot sample from an empty buffer");
  std::vector<const Experience*> batch;
  batch.reserve(k);
  for (std::size_t i = 0; i < k; ++i) batch.push_back(&items_[rng.uniform_index(items_.size())]);
  return batch;
}

void ReplayBuffer::restore(std::vector<Experience> items, std::size_t cursor) {
  if (items.size() > capacity_ || cursor >= capacity_) throw ArgumentError("ReplayBuffer: restored state exceeds capacity");
  items_ = std::move(items);
  items_.reserve(capacity_);
  cursor_ = cursor;
}

}  // namespace pomfq
