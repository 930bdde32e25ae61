#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "umanip/geometry.hpp"

namespace umanip {

inline constexpr double kStepLength = 0.18;       // end-effector travel per action, m
inline constexpr double kPrismaticDelta = 0.15;   // significance threshold, m
inline constexpr double kRevoluteDelta = 0.15;    // significance threshold, rad (8.6 deg)
inline constexpr double kMinLeverRadius = 0.05;   // grasps closer to a hinge do not move it, m
inline constexpr std::size_t kDefaultSampleCount = 512;
inline constexpr double kLimitTolerance = 1e-12;

enum class JointKind { kRevolute, kPrismatic, kPath };

const char* to_string(JointKind kind);
double default_delta(JointKind kind);

// Joint geometry is expressed in the parent's rest frame, which for links
// attached to the base is the world frame at rest.
struct Joint {
  JointKind kind = JointKind::kRevolute;
  Vec3 axis_direction = Vec3::UnitZ();  // revolute / prismatic
  Vec3 axis_point = Vec3::Zero();       // revolute
  std::vector<Vec3> path;               // path: polyline, q is arc length from path[0]
  double lower = 0.0;
  double upper = 0.0;
  double delta = kRevoluteDelta;

  double range() const { return upper - lower; }
  double path_length() const;
  // Point and unit tangent of the polyline at arc length q (clamped to the
  // polyline). At an interior vertex the outgoing segment is used.
  Vec3 path_point(double q) const;
  Vec3 path_tangent(double q) const;
};

struct Link {
  std::string id;
  int parent = -1;  // index into the object's link list; -1 only for the base
  std::optional<Joint> joint;
  std::vector<Shape> shapes;  // rest-frame geometry
};

using JointState = Eigen::VectorXd;
using Pose = Eigen::Isometry3d;

// Immutable articulated object. links[0] is the base; every other link has
// exactly one joint, a parent earlier in the list, and depth at most two.
class ArticulatedObject {
 public:
  ArticulatedObject(std::string name, std::string category, std::vector<Link> links,
                    std::size_t surface_sample_count = kDefaultSampleCount,
                    int step_budget = 10);

  const std::string& name() const { return name_; }
  const std::string& category() const { return category_; }
  const std::vector<Link>& links() const { return links_; }
  const Link& link(int index) const { return links_.at(static_cast<std::size_t>(index)); }
  int link_count() const { return static_cast<int>(links_.size()); }
  std::size_t surface_sample_count() const { return sample_count_; }
  int step_budget() const { return step_budget_; }

  std::size_t joint_count() const { return joint_links_.size(); }
  const Joint& joint(std::size_t j) const { return *links_[joint_links_.at(j)].joint; }
  int joint_link(std::size_t j) const { return joint_links_.at(j); }
  // Joint index carried by a link, or -1 for the base.
  int link_joint(int link) const { return link_joints_.at(static_cast<std::size_t>(link)); }

  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;
  Eigen::VectorXd deltas() const;
  bool within_limits(const JointState& state, double tolerance = kLimitTolerance) const;
  void check_state(const JointState& state) const;

  struct SurfaceTriangle {
    int link = 0;
    Triangle triangle;
  };
  const std::vector<SurfaceTriangle>& surface() const { return surface_; }
  // Running area sum over surface(); back() is the total area.
  const std::vector<double>& cumulative_area() const { return cumulative_area_; }

 private:
  std::string name_;
  std::string category_;
  std::vector<Link> links_;
  std::size_t sample_count_;
  int step_budget_;
  std::vector<int> joint_links_;
  std::vector<int> link_joints_;
  std::vector<SurfaceTriangle> surface_;
  std::vector<double> cumulative_area_;
};

// World pose of every link; base is identity.
std::vector<Pose> forward_kinematics(const ArticulatedObject& object, const JointState& state);

struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  int link = 0;
};

// Per-point features: position (3), normal (3), edge proximity in (0,1]
// as a curvature proxy, height above the ground plane z = 0.
inline constexpr int kPointFeatureDim = 8;
inline constexpr int kPooledFeatureDim = 2 * kPointFeatureDim;
using PointFeatures = Eigen::Matrix<double, Eigen::Dynamic, kPointFeatureDim, Eigen::RowMajor>;
using PooledFeatures = Eigen::Matrix<double, kPooledFeatureDim, 1>;

struct Observation {
  std::vector<SurfacePoint> points;
  PointFeatures features;
  PooledFeatures pooled = PooledFeatures::Zero();  // mean then max of features

  std::size_t size() const { return points.size(); }
  // Index of the point closest to p.
  std::size_t nearest(const Vec3& p) const;
};

// Builds feature rows and pooled features from points and their edge
// proximity values.
Observation make_observation(std::vector<SurfacePoint> points, const std::vector<double>& edge_features);

Observation sample_surface(const ArticulatedObject& object, const JointState& state,
                           std::size_t count, std::uint64_t seed);

struct JointTangent {
  Vec3 direction = Vec3::Zero();
  double lever_radius = 0.0;  // revolute only
};

JointTangent joint_tangent(const ArticulatedObject& object, const JointState& state,
                           const SurfacePoint& grasp);

// Joint-coordinate change of the grasped link's joint, after projection,
// the arc cap and clamping; zero for base and near-axis grasps.
double joint_delta(const ArticulatedObject& object, const JointState& state,
                   const SurfacePoint& grasp, const Vec3& direction, double step = kStepLength);

// joint_delta for many directions at one grasp, sharing the kinematics.
std::vector<double> joint_deltas(const ArticulatedObject& object, const JointState& state,
                                 const SurfacePoint& grasp, const std::vector<Vec3>& directions,
                                 double step = kStepLength);

// Distance of a point to its link's hinge line: 0 on the base, +inf on
// prismatic and path links.
double lever_radius(const ArticulatedObject& object, const std::vector<Pose>& poses,
                    const SurfacePoint& point);

struct Displacement {
  JointState state;
  SurfacePoint grasp;
};

Displacement apply_displacement(const ArticulatedObject& object, const JointState& state,
                                const SurfacePoint& grasp, const Vec3& direction,
                                double step = kStepLength);

}  // namespace umanip
