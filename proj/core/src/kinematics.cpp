#include "umanip/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "umanip/error.hpp"
#include "umanip/rng.hpp"

namespace umanip {

const char* to_string(JointKind kind) {
  switch (kind) {
    case JointKind::kRevolute: return "revolute";
    case JointKind::kPrismatic: return "prismatic";
    case JointKind::kPath: return "path";
  }
  return "unknown";
}

double default_delta(JointKind kind) {
  return kind == JointKind::kRevolute ? kRevoluteDelta : kPrismaticDelta;
}

double Joint::path_length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) total += (path[i] - path[i - 1]).norm();
  return total;
}

namespace {

// Segment index and offset within it for arc length q.
std::pair<std::size_t, double> locate(const std::vector<Vec3>& path, double q) {
  double s = std::max(q, 0.0);
  const std::size_t last = path.size() - 2;
  for (std::size_t i = 0; i <= last; ++i) {
    const double len = (path[i + 1] - path[i]).norm();
    if (s < len || i == last) return {i, std::min(s, len)};
    s -= len;
  }
  return {last, 0.0};
}

}  // namespace

Vec3 Joint::path_point(double q) const {
  const auto [seg, offset] = locate(path, q);
  const Vec3 dir = (path[seg + 1] - path[seg]).normalized();
  return path[seg] + offset * dir;
}

Vec3 Joint::path_tangent(double q) const {
  const auto [seg, offset] = locate(path, q);
  (void)offset;
  return (path[seg + 1] - path[seg]).normalized();
}

namespace {

void validate_joint(const Joint& joint, const std::string& link_id) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kSchema, "joint of link '" + link_id + "': " + what);
  };
  if (!(joint.lower < joint.upper)) fail("lower limit must be below upper limit");
  if (!(joint.delta > 0.0)) fail("delta must be positive");
  switch (joint.kind) {
    case JointKind::kRevolute:
    case JointKind::kPrismatic:
      if (std::abs(joint.axis_direction.norm() - 1.0) > 1e-9) fail("axis direction must be unit length");
      break;
    case JointKind::kPath: {
      if (joint.path.size() < 2) fail("path needs at least two points");
      for (std::size_t i = 1; i < joint.path.size(); ++i) {
        if ((joint.path[i] - joint.path[i - 1]).norm() <= 1e-12) fail("path has a zero-length segment");
      }
      const double len = joint.path_length();
      if (joint.lower < -1e-12 || joint.upper > len + 1e-12) fail("path limits must lie within [0, path length]");
      break;
    }
  }
}

Pose joint_motion(const Joint& joint, double q) {
  Pose motion = Pose::Identity();
  switch (joint.kind) {
    case JointKind::kRevolute:
      motion.translate(joint.axis_point);
      motion.rotate(Eigen::AngleAxisd(q, joint.axis_direction));
      motion.translate(-joint.axis_point);
      break;
    case JointKind::kPrismatic:
      motion.translate(q * joint.axis_direction);
      break;
    case JointKind::kPath:
      motion.translate(joint.path_point(q) - joint.path_point(0.0));
      break;
  }
  return motion;
}

}  // namespace

ArticulatedObject::ArticulatedObject(std::string name, std::string category, std::vector<Link> links,
                                     std::size_t surface_sample_count, int step_budget)
    : name_(std::move(name)),
      category_(std::move(category)),
      links_(std::move(links)),
      sample_count_(surface_sample_count),
      step_budget_(step_budget) {
  if (links_.empty()) throw Error(ErrorKind::kSchema, "object has no links");
  if (sample_count_ < 1) throw Error(ErrorKind::kSchema, "surface_sample_count must be at least 1");
  if (step_budget_ < 1) throw Error(ErrorKind::kSchema, "step_budget must be at least 1");
  std::set<std::string> ids;
  std::vector<int> depth(links_.size(), 0);
  link_joints_.assign(links_.size(), -1);
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const Link& link = links_[i];
    if (!ids.insert(link.id).second) throw Error(ErrorKind::kSchema, "duplicate link id '" + link.id + "'");
    if (i == 0) {
      if (link.parent != -1 || link.joint) {
        throw Error(ErrorKind::kSchema, "first link must be the base: no parent, no joint");
      }
      continue;
    }
    if (link.parent < 0 || link.parent >= static_cast<int>(i)) {
      throw Error(ErrorKind::kSchema, "link '" + link.id + "' must name an earlier link as parent");
    }
    if (!link.joint) throw Error(ErrorKind::kSchema, "link '" + link.id + "' has no joint");
    depth[i] = depth[static_cast<std::size_t>(link.parent)] + 1;
    if (depth[i] > 2) throw Error(ErrorKind::kSchema, "link '" + link.id + "' exceeds depth 2");
    validate_joint(*link.joint, link.id);
    link_joints_[i] = static_cast<int>(joint_links_.size());
    joint_links_.push_back(static_cast<int>(i));
  }

  double running = 0.0;
  for (std::size_t i = 0; i < links_.size(); ++i) {
    for (const Shape& shape : links_[i].shapes) {
      for (const Triangle& tri : triangulate(shape)) {
        const double area = tri.area();
        if (area <= 0.0) continue;
        running += area;
        surface_.push_back({static_cast<int>(i), tri});
        cumulative_area_.push_back(running);
      }
    }
  }
}

Eigen::VectorXd ArticulatedObject::lower_limits() const {
  Eigen::VectorXd v(joint_count());
  for (std::size_t j = 0; j < joint_count(); ++j) v[static_cast<Eigen::Index>(j)] = joint(j).lower;
  return v;
}

Eigen::VectorXd ArticulatedObject::upper_limits() const {
  Eigen::VectorXd v(joint_count());
  for (std::size_t j = 0; j < joint_count(); ++j) v[static_cast<Eigen::Index>(j)] = joint(j).upper;
  return v;
}

Eigen::VectorXd ArticulatedObject::deltas() const {
  Eigen::VectorXd v(joint_count());
  for (std::size_t j = 0; j < joint_count(); ++j) v[static_cast<Eigen::Index>(j)] = joint(j).delta;
  return v;
}

bool ArticulatedObject::within_limits(const JointState& state, double tolerance) const {
  if (static_cast<std::size_t>(state.size()) != joint_count()) return false;
  for (std::size_t j = 0; j < joint_count(); ++j) {
    const double q = state[static_cast<Eigen::Index>(j)];
    if (!(q >= joint(j).lower - tolerance && q <= joint(j).upper + tolerance)) return false;
  }
  return true;
}

void ArticulatedObject::check_state(const JointState& state) const {
  if (static_cast<std::size_t>(state.size()) != joint_count()) {
    throw Error(ErrorKind::kShape, "joint state has " + std::to_string(state.size()) +
                                       " entries, object has " + std::to_string(joint_count()) + " joints");
  }
  if (!within_limits(state)) {
    std::ostringstream msg;
    msg << "joint state outside limits for object '" << name_ << "'";
    throw Error(ErrorKind::kLimitViolation, msg.str());
  }
}

std::vector<Pose> forward_kinematics(const ArticulatedObject& object, const JointState& state) {
  object.check_state(state);
  std::vector<Pose> poses(static_cast<std::size_t>(object.link_count()), Pose::Identity());
  for (int i = 1; i < object.link_count(); ++i) {
    const Link& link = object.link(i);
    const double q = state[object.link_joint(i)];
    poses[static_cast<std::size_t>(i)] = poses[static_cast<std::size_t>(link.parent)] * joint_motion(*link.joint, q);
  }
  return poses;
}

std::size_t Observation::nearest(const Vec3& p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = (points[i].position - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace {

constexpr double kEdgeFalloff = 0.02;  // m

}  // namespace

Observation sample_surface(const ArticulatedObject& object, const JointState& state,
                           std::size_t count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::kArgument, "sample count must be at least 1");
  const auto& cumulative = object.cumulative_area();
  if (cumulative.empty() || !(cumulative.back() > 0.0)) {
    throw Error(ErrorKind::kGeometry, "object '" + object.name() + "' has zero surface area");
  }
  const std::vector<Pose> poses = forward_kinematics(object, state);
  const double total = cumulative.back();
  Rng rng(seed);

  std::vector<SurfacePoint> points(count);
  std::vector<double> edges(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    const auto& st = object.surface()[static_cast<std::size_t>(it - cumulative.begin())];
    const double u = rng.uniform();
    const double v = rng.uniform();
    const Vec3 local = st.triangle.point_at(u, v);
    const Pose& pose = poses[static_cast<std::size_t>(st.link)];
    points[i].position = pose * local;
    points[i].normal = pose.linear() * st.triangle.normal();
    points[i].link = st.link;
    edges[i] = std::exp(-distance_to_feature_edge(st.triangle, local) / kEdgeFalloff);
  }
  return make_observation(std::move(points), edges);
}

Observation make_observation(std::vector<SurfacePoint> points, const std::vector<double>& edge_features) {
  if (points.size() != edge_features.size() || points.empty()) {
    throw Error(ErrorKind::kShape, "observation needs one edge feature per point");
  }
  Observation obs;
  obs.points = std::move(points);
  obs.features.resize(static_cast<Eigen::Index>(obs.points.size()), kPointFeatureDim);
  for (std::size_t i = 0; i < obs.points.size(); ++i) {
    auto row = obs.features.row(static_cast<Eigen::Index>(i));
    row.segment<3>(0) = obs.points[i].position.transpose();
    row.segment<3>(3) = obs.points[i].normal.transpose();
    row[6] = edge_features[i];
    row[7] = obs.points[i].position.z();
  }
  obs.pooled.head<kPointFeatureDim>() = obs.features.colwise().mean().transpose();
  obs.pooled.tail<kPointFeatureDim>() = obs.features.colwise().maxCoeff().transpose();
  return obs;
}

namespace {

struct JointFrame {
  Vec3 axis_direction;
  Vec3 axis_point;
  Vec3 path_tangent;
};

JointFrame posed_joint(const ArticulatedObject& object, const std::vector<Pose>& poses, int link_index,
                       double q) {
  const Link& link = object.link(link_index);
  const Pose& parent = poses[static_cast<std::size_t>(link.parent)];
  const Joint& joint = *link.joint;
  JointFrame f;
  f.axis_direction = parent.linear() * joint.axis_direction;
  f.axis_point = parent * joint.axis_point;
  f.path_tangent = joint.kind == JointKind::kPath ? Vec3(parent.linear() * joint.path_tangent(q))
                                                   : Vec3::Zero();
  return f;
}

JointTangent tangent_from_frame(const Joint& joint, const JointFrame& frame, const Vec3& p) {
  JointTangent t;
  switch (joint.kind) {
    case JointKind::kPrismatic:
      t.direction = frame.axis_direction;
      break;
    case JointKind::kPath:
      t.direction = frame.path_tangent;
      break;
    case JointKind::kRevolute: {
      const Vec3 rel = p - frame.axis_point;
      const Vec3 radial = rel - rel.dot(frame.axis_direction) * frame.axis_direction;
      t.lever_radius = radial.norm();
      const Vec3 dir = frame.axis_direction.cross(radial);
      const double len = dir.norm();
      t.direction = len > 0.0 ? Vec3(dir / len) : Vec3::Zero();
      break;
    }
  }
  return t;
}

}  // namespace

JointTangent joint_tangent(const ArticulatedObject& object, const JointState& state,
                           const SurfacePoint& grasp) {
  const int j = object.link_joint(grasp.link);
  if (j < 0) throw Error(ErrorKind::kImmovable, "grasp is on the base link");
  const std::vector<Pose> poses = forward_kinematics(object, state);
  const Joint& joint = object.joint(static_cast<std::size_t>(j));
  const JointTangent t =
      tangent_from_frame(joint, posed_joint(object, poses, grasp.link, state[j]), grasp.position);
  if (joint.kind == JointKind::kRevolute && t.lever_radius < kMinLeverRadius) {
    throw Error(ErrorKind::kNearAxis, "grasp lies within the minimum lever radius of the hinge");
  }
  return t;
}

namespace {

double delta_from_tangent(const Joint& joint, const JointTangent& t, double current, const Vec3& direction,
                          double step) {
  if (joint.kind == JointKind::kRevolute && t.lever_radius < kMinLeverRadius) return 0.0;
  double dq = step * direction.dot(t.direction);
  if (joint.kind == JointKind::kRevolute) {
    dq /= t.lever_radius;
    const double max_angle = step / t.lever_radius;  // arc length cap
    dq = std::clamp(dq, -max_angle, max_angle);
  }
  const double target = std::clamp(current + dq, joint.lower, joint.upper);
  return target - current;
}

void check_direction(const Vec3& direction) {
  if (std::abs(direction.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kArgument, "action direction must be unit length");
  }
}

}  // namespace

double joint_delta(const ArticulatedObject& object, const JointState& state, const SurfacePoint& grasp,
                   const Vec3& direction, double step) {
  check_direction(direction);
  const int j = object.link_joint(grasp.link);
  if (j < 0) return 0.0;
  const std::vector<Pose> poses = forward_kinematics(object, state);
  const Joint& joint = object.joint(static_cast<std::size_t>(j));
  const JointTangent t =
      tangent_from_frame(joint, posed_joint(object, poses, grasp.link, state[j]), grasp.position);
  return delta_from_tangent(joint, t, state[j], direction, step);
}

std::vector<double> joint_deltas(const ArticulatedObject& object, const JointState& state,
                                 const SurfacePoint& grasp, const std::vector<Vec3>& directions,
                                 double step) {
  for (const Vec3& d : directions) check_direction(d);
  std::vector<double> out(directions.size(), 0.0);
  const int j = object.link_joint(grasp.link);
  if (j < 0) return out;
  const std::vector<Pose> poses = forward_kinematics(object, state);
  const Joint& joint = object.joint(static_cast<std::size_t>(j));
  const JointTangent t =
      tangent_from_frame(joint, posed_joint(object, poses, grasp.link, state[j]), grasp.position);
  for (std::size_t i = 0; i < directions.size(); ++i) {
    out[i] = delta_from_tangent(joint, t, state[j], directions[i], step);
  }
  return out;
}

double lever_radius(const ArticulatedObject& object, const std::vector<Pose>& poses,
                    const SurfacePoint& point) {
  const int j = object.link_joint(point.link);
  if (j < 0) return 0.0;
  const Joint& joint = object.joint(static_cast<std::size_t>(j));
  if (joint.kind != JointKind::kRevolute) return std::numeric_limits<double>::infinity();
  return tangent_from_frame(joint, posed_joint(object, poses, point.link, 0.0), point.position).lever_radius;
}

Displacement apply_displacement(const ArticulatedObject& object, const JointState& state,
                                const SurfacePoint& grasp, const Vec3& direction, double step) {
  check_direction(direction);
  Displacement out{state, grasp};
  const int j = object.link_joint(grasp.link);
  if (j < 0) {
    object.check_state(state);
    return out;
  }
  const std::vector<Pose> before = forward_kinematics(object, state);
  const Joint& joint = object.joint(static_cast<std::size_t>(j));
  const JointTangent t =
      tangent_from_frame(joint, posed_joint(object, before, grasp.link, state[j]), grasp.position);
  const double dq = delta_from_tangent(joint, t, state[j], direction, step);
  if (dq == 0.0) return out;
  out.state[j] = std::clamp(state[j] + dq, joint.lower, joint.upper);
  const std::vector<Pose> after = forward_kinematics(object, out.state);
  const Pose relative = after[static_cast<std::size_t>(grasp.link)] *
                        before[static_cast<std::size_t>(grasp.link)].inverse();
  out.grasp.position = relative * grasp.position;
  out.grasp.normal = (relative.linear() * grasp.normal).normalized();
  return out;
}

}  // namespace umanip
