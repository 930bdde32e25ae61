#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "umanip/policy.hpp"
#include "umanip/replay_buffer.hpp"
#include "umanip/sampler.hpp"

namespace umanip {

struct TrainConfig {
  long epochs = 2000;
  int trajectories_per_epoch = 16;
  int iterations_per_head = 8;
  int initial_length = 4;
  long growth_start = 1000;
  long growth_interval = 400;
  int growth_step = 2;
  int max_length = 20;
  EpsilonSchedule position_epsilon = EpsilonSchedule::position();
  EpsilonSchedule direction_epsilon = EpsilonSchedule::direction();
  std::size_t buffer_capacity = kReplayCapacity;
  long checkpoint_every = 0;  // epochs; 0 disables
  std::string checkpoint_path;
  ModelConfig model;
  LossConfig loss;
  CemConfig cem;

  void validate() const;
  int sequence_length(long epoch) const;
};

struct EpochLog {
  long epoch = 0;
  int length = 0;
  double position_epsilon = 0.0;
  double direction_epsilon = 0.0;
  double position_loss = 0.0;  // mean over the epoch's iterations
  double dist_loss = 0.0;
  double aot_loss = 0.0;
  std::size_t buffer_size = 0;
  int moved_episodes = 0;  // episodes whose state changed at least once

  bool operator==(const EpochLog&) const = default;
};

struct TrainingResult {
  PolicyModel model;
  std::vector<EpochLog> logs;
  bool interrupted = false;
};

// Called after every epoch; returning false stops training early.
using EpochCallback = std::function<bool(const EpochLog&, const PolicyModel&)>;

TrainingResult run_training(const TrainConfig& cfg, const std::vector<ArticulatedObject>& suite, std::uint64_t seed,
                            const EpochCallback& on_epoch = {});

}  // namespace umanip
