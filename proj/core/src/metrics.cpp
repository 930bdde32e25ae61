#include "umanip/metrics.hpp"

#include <numeric>

#include "umanip/error.hpp"

namespace umanip {

namespace {

double normalized_distance(const JointState& a, const JointState& b, const Eigen::VectorXd& deltas) {
  if (a.size() != b.size() || a.size() != deltas.size()) throw Error(ErrorKind::kShape, "joint vector size mismatch");
  return ((a - b).array() / deltas.array()).matrix().norm();
}

}  // namespace

std::vector<double> single_action_effect(std::span<const JointState> before, std::span<const JointState> after,
                                         const Eigen::VectorXd& deltas) {
  if (before.size() != after.size()) throw Error(ErrorKind::kShape, "state sequences differ in length");
  std::vector<double> d(before.size());
  for (std::size_t i = 0; i < before.size(); ++i) d[i] = normalized_distance(after[i], before[i], deltas);
  return d;
}

std::vector<double> single_action_effect(std::span<const Transition> trajectory, const Eigen::VectorXd& deltas) {
  std::vector<double> d(trajectory.size());
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    d[i] = normalized_distance(trajectory[i].j_curr, trajectory[i].j_prev, deltas);
  }
  return d;
}

double unique_ratio(std::span<const JointState> post_states, const Eigen::VectorXd& deltas) {
  if (post_states.empty()) throw Error(ErrorKind::kArgument, "unique ratio needs at least one step");
  std::vector<const JointState*> kept;
  for (const JointState& s : post_states) {
    bool novel = true;
    for (const JointState* k : kept) {
      if (normalized_distance(s, *k, deltas) < 1.0) {
        novel = false;
        break;
      }
    }
    if (novel) kept.push_back(&s);
  }
  return static_cast<double>(kept.size()) / static_cast<double>(post_states.size());
}

double unique_ratio(std::span<const Transition> trajectory, const Eigen::VectorXd& deltas) {
  std::vector<JointState> states;
  states.reserve(trajectory.size());
  for (const Transition& t : trajectory) states.push_back(t.j_curr);
  return unique_ratio(states, deltas);
}

GoalMetric goal_metric(const JointState& j_end, const JointState& j_goal, const JointState& j_init,
                       const Eigen::VectorXd& deltas) {
  const double span = normalized_distance(j_goal, j_init, deltas);
  if (span == 0.0) throw Error(ErrorKind::kUndefinedTask, "goal equals the initial state");
  GoalMetric m;
  m.e_goal = normalized_distance(j_end, j_goal, deltas) / span;
  m.success = m.e_goal < kGoalSuccessThreshold;
  return m;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace umanip
