#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "umanip/agent.hpp"
#include "umanip/metrics.hpp"
#include "umanip/replay_buffer.hpp"

namespace umanip {

enum class Termination { kBudgetExhausted, kGoalTerminated, kNoValidPosition };

const char* to_string(Termination t);

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<double> step_effect;  // D per step
  Termination termination = Termination::kBudgetExhausted;
  JointState final_state;
  std::optional<std::size_t> grasp_index;  // point chosen in the initial observation

  int steps() const { return static_cast<int>(transitions.size()); }
};

enum class ExploreMode {
  kContradictory,  // first half Forward, second half Backward
  kForward,        // Forward throughout; used for exploration evaluation
};

struct ExploreOptions {
  int length = 8;
  ExploreMode mode = ExploreMode::kContradictory;
  double position_epsilon = 0.0;
  double direction_epsilon = 0.0;
};

// Step 0 picks the grasp; every step picks a CEM direction under the mode's
// selection rule. Transitions are pushed to buffer when given.
EpisodeResult explore_episode(Environment& env, const Agent& agent, const ExploreOptions& options,
                              std::uint64_t seed, ReplayBuffer* buffer = nullptr);

inline constexpr double kDiffMaskThreshold = 0.02;  // m

// 1 where corresponding points moved by more than kDiffMaskThreshold,
// dilated to whole links, multiplied into scores.
std::vector<double> diff_mask_filter(const Observation& obs_init, const Observation& obs_goal,
                                     std::span<const double> position_scores);

struct GoalTask {
  std::string name;
  JointState j_init;
  JointState j_goal;
  std::uint64_t observation_seed = 0;
  std::shared_ptr<const Observation> obs_goal;
  int budget = 15;
};

inline constexpr int kMaxGoalSteps = 15;

// Goal-conditioned episode: the goal observation replaces the initial one
// and directions are picked with reversed AoT. env must start at task.j_init
// with task.observation_seed.
EpisodeResult goal_episode(Environment& env, const Agent& agent, const GoalTask& task, std::uint64_t seed);

struct GoalTaskOptions {
  std::uint64_t observation_seed = 0;
  int probe_count = 3;
  double pull_step = 0.05;     // fraction of delta per pull-in increment
  double max_pull = 0.5;       // fraction of the joint range
  CemConfig cem;
};

// Two tasks per object: "open" drives joint 0 from its lower to its upper
// limit and "close" the last joint from upper to lower, other joints at
// their lower limits. The initial state is pulled toward the goal until the
// oracle finishes within the object's budget on every probe seed.
std::vector<GoalTask> make_goal_tasks(const ArticulatedObject& object, const GoalTaskOptions& options);

}  // namespace umanip
