#include "umanip/replay_buffer.hpp"

#include <array>
#include <mutex>

#include "umanip/error.hpp"
#include "umanip/rng.hpp"

namespace umanip {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorKind::kArgument, "replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition transition) {
  std::unique_lock lock(mutex_);
  const bool moved = transition.outcome.r_aot != AotLabel::kStill;
  if (moved) {
    // Earlier steps of this episode now have a state change in their future.
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (it->transition.episode_id != transition.episode_id) continue;
      it->future_change = true;
      if (it->transition.step_index == 0) break;
    }
  }
  entries_.push_back(Entry{std::move(transition), moved});
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::size_t ReplayBuffer::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<Transition> ReplayBuffer::snapshot() const {
  std::shared_lock lock(mutex_);
  std::vector<Transition> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.transition);
  return out;
}

bool ReplayBuffer::future_change(std::size_t i) const {
  std::shared_lock lock(mutex_);
  return entries_.at(i).future_change;
}

namespace {

// Draws counts[k] items from each stratum with replacement. Slots belonging
// to empty strata are redistributed round-robin over the non-empty ones.
template <std::size_t K>
std::vector<std::pair<std::size_t, std::size_t>> stratified_draw(
    const std::array<std::vector<std::size_t>, K>& strata, std::size_t n, Rng& rng, bool& degenerate) {
  std::array<std::size_t, K> counts{};
  for (std::size_t k = 0; k < K; ++k) counts[k] = n / K + (k < n % K ? 1 : 0);
  std::vector<std::size_t> populated;
  for (std::size_t k = 0; k < K; ++k) {
    if (!strata[k].empty()) populated.push_back(k);
  }
  degenerate = populated.size() < K;
  std::size_t orphan = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (strata[k].empty()) {
      orphan += counts[k];
      counts[k] = 0;
    }
  }
  for (std::size_t i = 0; i < orphan; ++i) ++counts[populated[i % populated.size()]];

  std::vector<std::pair<std::size_t, std::size_t>> picks;  // (stratum, entry index)
  picks.reserve(n);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < counts[k]; ++i) {
      picks.emplace_back(k, strata[k][rng.index(strata[k].size())]);
    }
  }
  return picks;
}

}  // namespace

PositionBatch ReplayBuffer::sample_position_batch(std::size_t n, std::uint64_t seed) const {
  std::shared_lock lock(mutex_);
  std::array<std::vector<std::size_t>, 2> strata;  // positive, negative
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].transition.step_index != 0) continue;
    strata[entries_[i].future_change ? 0 : 1].push_back(i);
  }
  if (strata[0].empty() && strata[1].empty()) {
    throw Error(ErrorKind::kEmptyBuffer, "no grasp transitions available for a position batch");
  }
  Rng rng(seed);
  PositionBatch batch;
  for (const auto& [k, idx] : stratified_draw(strata, n, rng, batch.degenerate)) {
    batch.items.push_back(entries_[idx].transition);
    batch.labels.push_back(k == 0 ? 1 : 0);
  }
  return batch;
}

DirectionBatch ReplayBuffer::sample_direction_batch(std::size_t n, std::uint64_t seed) const {
  std::shared_lock lock(mutex_);
  if (entries_.empty()) throw Error(ErrorKind::kEmptyBuffer, "replay buffer is empty");
  std::array<std::vector<std::size_t>, 3> strata;  // +1, -1, 0
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    switch (entries_[i].transition.outcome.r_aot) {
      case AotLabel::kForward: strata[0].push_back(i); break;
      case AotLabel::kBackward: strata[1].push_back(i); break;
      case AotLabel::kStill: strata[2].push_back(i); break;
    }
  }
  Rng rng(seed);
  DirectionBatch batch;
  for (const auto& [k, idx] : stratified_draw(strata, n, rng, batch.degenerate)) {
    (void)k;
    batch.items.push_back(entries_[idx].transition);
  }
  return batch;
}

}  // namespace umanip
