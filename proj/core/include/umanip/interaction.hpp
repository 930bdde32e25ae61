#pragma once

#include <cstdint>
#include <memory>
#include <optional>

#include "umanip/kinematics.hpp"

namespace umanip {

inline constexpr double kGraspMissRadius = 0.02;  // m

// Action executed at one step. position is the current grasp location in
// the world frame; on the first step of an episode it selects the grasp.
struct Action {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitX();
};

enum class AotLabel : int { kBackward = -1, kStill = 0, kForward = 1 };

// Index into a three-way probability vector ordered {-1, 0, +1}.
inline int aot_class_index(AotLabel label) { return static_cast<int>(label) + 1; }
inline AotLabel aot_from_class_index(int index) { return static_cast<AotLabel>(index - 1); }

struct InteractionOutcome {
  double r_dist = 0.0;
  double gamma = 0.0;
  AotLabel r_aot = AotLabel::kStill;

  bool operator==(const InteractionOutcome&) const = default;
};

// Unit convention for joint vectors. When every joint shares one delta the
// native units are kept with threshold delta; otherwise each coordinate is
// divided by its own delta and the threshold becomes 1.
struct JointMetric {
  Eigen::VectorXd scale;
  double threshold = 1.0;
};

JointMetric joint_metric(const Eigen::VectorXd& deltas);

InteractionOutcome compute_outcome(const JointState& j_init, const JointState& j_prev,
                                   const JointState& j_curr, const Eigen::VectorXd& deltas);

struct Transition {
  std::shared_ptr<const Observation> obs_prev;
  std::shared_ptr<const Observation> obs_init;
  Action action;
  JointState j_init;
  JointState j_prev;
  JointState j_curr;
  InteractionOutcome outcome;
  std::uint64_t episode_id = 0;
  int step_index = 0;
};

// One interaction session with one object. Single-threaded; the object must
// outlive the environment.
class Environment {
 public:
  Environment(const ArticulatedObject& object, JointState initial, std::uint64_t observation_seed,
              std::uint64_t episode_id = 0);

  const ArticulatedObject& object() const { return *object_; }
  const JointState& state() const { return state_; }
  const JointState& initial_state() const { return initial_; }
  std::uint64_t observation_seed() const { return obs_seed_; }
  std::uint64_t episode_id() const { return episode_id_; }
  int steps_taken() const { return steps_; }

  const std::shared_ptr<const Observation>& observation() const { return obs_; }
  const std::shared_ptr<const Observation>& initial_observation() const { return obs_init_; }
  const std::optional<SurfacePoint>& grasp() const { return grasp_; }

  // Observation of an arbitrary state with this environment's sampling seed,
  // so that point i corresponds across states.
  std::shared_ptr<const Observation> observe(const JointState& state) const;

  // Attaches the suction cup when no grasp is held (nearest sampled point
  // within kGraspMissRadius; a miss yields a zero-motion transition), then
  // moves the end-effector kStepLength along action.direction.
  Transition step(const Action& action);

 private:
  const ArticulatedObject* object_;
  JointState initial_;
  JointState state_;
  std::uint64_t obs_seed_;
  std::uint64_t episode_id_;
  int steps_ = 0;
  std::shared_ptr<const Observation> obs_init_;
  std::shared_ptr<const Observation> obs_;
  std::optional<SurfacePoint> grasp_;
};

}  // namespace umanip
