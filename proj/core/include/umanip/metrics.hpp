#pragma once

#include <span>
#include <vector>

#include "umanip/interaction.hpp"

namespace umanip {

// Per-step normalized displacement D = |(j_t - j_{t-1}) / delta|.
std::vector<double> single_action_effect(std::span<const JointState> before, std::span<const JointState> after,
                                         const Eigen::VectorXd& deltas);
std::vector<double> single_action_effect(std::span<const Transition> trajectory, const Eigen::VectorXd& deltas);

// Greedy delta-ball clustering of post-step states in visit order; a state
// is kept when its normalized distance to every kept state is >= 1.
// Returns kept / steps. Throws kArgument on an empty trajectory.
double unique_ratio(std::span<const JointState> post_states, const Eigen::VectorXd& deltas);
double unique_ratio(std::span<const Transition> trajectory, const Eigen::VectorXd& deltas);

inline constexpr double kGoalSuccessThreshold = 0.1;

struct GoalMetric {
  double e_goal = 0.0;
  bool success = false;
};

// |j_end - j_goal| / |j_goal - j_init| in delta-normalized coordinates.
// Throws kUndefinedTask when j_goal equals j_init.
GoalMetric goal_metric(const JointState& j_end, const JointState& j_goal, const JointState& j_init,
                       const Eigen::VectorXd& deltas);

double mean(std::span<const double> values);

}  // namespace umanip
