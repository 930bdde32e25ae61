#include "umanip/interaction.hpp"

#include "umanip/error.hpp"

namespace umanip {

JointMetric joint_metric(const Eigen::VectorXd& deltas) {
  JointMetric m;
  if (deltas.size() == 0) {
    m.scale = Eigen::VectorXd();
    m.threshold = 1.0;
    return m;
  }
  if ((deltas.array() <= 0.0).any()) throw Error(ErrorKind::kArgument, "joint deltas must be positive");
  const bool uniform = (deltas.array() == deltas[0]).all();
  if (uniform) {
    m.scale = Eigen::VectorXd::Ones(deltas.size());
    m.threshold = deltas[0];
  } else {
    m.scale = deltas.cwiseInverse();
    m.threshold = 1.0;
  }
  return m;
}

InteractionOutcome compute_outcome(const JointState& j_init, const JointState& j_prev, const JointState& j_curr,
                                   const Eigen::VectorXd& deltas) {
  if (j_init.size() != j_prev.size() || j_prev.size() != j_curr.size() || j_curr.size() != deltas.size()) {
    throw Error(ErrorKind::kShape, "joint vectors and deltas must share one dimension");
  }
  const JointMetric metric = joint_metric(deltas);
  const Eigen::VectorXd step = metric.scale.cwiseProduct(j_curr - j_prev);
  const Eigen::VectorXd history = metric.scale.cwiseProduct(j_prev - j_init);
  InteractionOutcome out;
  out.r_dist = step.norm();
  out.gamma = step.dot(history);
  if (out.r_dist <= metric.threshold) {
    out.r_aot = AotLabel::kStill;
  } else {
    out.r_aot = out.gamma < 0.0 ? AotLabel::kBackward : AotLabel::kForward;
  }
  return out;
}

Environment::Environment(const ArticulatedObject& object, JointState initial, std::uint64_t observation_seed,
                         std::uint64_t episode_id)
    : object_(&object),
      initial_(std::move(initial)),
      state_(initial_),
      obs_seed_(observation_seed),
      episode_id_(episode_id) {
  object.check_state(initial_);
  obs_init_ = observe(initial_);
  obs_ = obs_init_;
}

std::shared_ptr<const Observation> Environment::observe(const JointState& state) const {
  return std::make_shared<const Observation>(
      sample_surface(*object_, state, object_->surface_sample_count(), obs_seed_));
}

Transition Environment::step(const Action& action) {
  Transition t;
  t.obs_prev = obs_;
  t.obs_init = obs_init_;
  t.j_init = initial_;
  t.j_prev = state_;
  t.episode_id = episode_id_;
  t.step_index = steps_;

  if (!grasp_) {
    const std::size_t idx = obs_->nearest(action.position);
    if ((obs_->points[idx].position - action.position).norm() <= kGraspMissRadius) {
      grasp_ = obs_->points[idx];
    }
  }
  t.action.direction = action.direction;
  t.action.position = grasp_ ? grasp_->position : action.position;

  if (grasp_) {
    Displacement d = apply_displacement(*object_, state_, *grasp_, action.direction);
    if (d.state != state_) {
      state_ = std::move(d.state);
      obs_ = observe(state_);
    }
    grasp_ = d.grasp;
  }
  t.j_curr = state_;
  t.outcome = compute_outcome(t.j_init, t.j_prev, t.j_curr, object_->deltas());
  ++steps_;
  return t;
}

}  // namespace umanip
