#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <shared_mutex>
#include <vector>

#include "umanip/interaction.hpp"

namespace umanip {

inline constexpr std::size_t kReplayCapacity = 6400;
inline constexpr std::size_t kPositionBatchSize = 16;
inline constexpr std::size_t kDirectionBatchSize = 24;

struct PositionBatch {
  std::vector<Transition> items;  // first step of an episode (carries the grasp)
  std::vector<int> labels;        // 1 iff the episode changed the object state at or after it
  bool degenerate = false;        // a stratum was empty; ratio not honoured
};

struct DirectionBatch {
  std::vector<Transition> items;  // labels are items[i].outcome
  bool degenerate = false;
};

// FIFO store of transitions. One writer, many readers: push takes an
// exclusive lock, sampling a shared one.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = kReplayCapacity);

  void push(Transition transition);
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }
  // Entries in insertion order.
  std::vector<Transition> snapshot() const;
  // Position label of the i-th entry in insertion order.
  bool future_change(std::size_t i) const;

  // Half positives, half negatives, drawn with replacement inside each stratum.
  PositionBatch sample_position_batch(std::size_t n, std::uint64_t seed) const;
  // Equal thirds across r_aot in {+1, -1, 0}.
  DirectionBatch sample_direction_batch(std::size_t n, std::uint64_t seed) const;

 private:
  struct Entry {
    Transition transition;
    bool future_change = false;
  };

  std::size_t capacity_;
  mutable std::shared_mutex mutex_;
  std::deque<Entry> entries_;
};

}  // namespace umanip
