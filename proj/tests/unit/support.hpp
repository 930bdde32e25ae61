#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "umanip/kinematics.hpp"

namespace umanip::testing {

inline Box span(const Vec3& lo, const Vec3& hi) { return Box{0.5 * (lo + hi), 0.5 * (hi - lo)}; }

inline Link base(std::vector<Shape> shapes) { return Link{"base", -1, std::nullopt, std::move(shapes)}; }

inline Joint prismatic(const Vec3& axis, double lo, double hi) {
  Joint j;
  j.kind = JointKind::kPrismatic;
  j.axis_direction = axis.normalized();
  j.lower = lo;
  j.upper = hi;
  j.delta = kPrismaticDelta;
  return j;
}

inline Joint revolute(const Vec3& axis, const Vec3& point, double lo, double hi) {
  Joint j;
  j.kind = JointKind::kRevolute;
  j.axis_direction = axis.normalized();
  j.axis_point = point;
  j.lower = lo;
  j.upper = hi;
  j.delta = kRevoluteDelta;
  return j;
}

inline Joint path_joint(std::vector<Vec3> points, double lo, double hi) {
  Joint j;
  j.kind = JointKind::kPath;
  j.path = std::move(points);
  j.lower = lo;
  j.upper = hi;
  j.delta = kPrismaticDelta;
  return j;
}

inline ArticulatedObject cube() {
  return ArticulatedObject("cube", "test", {base({span(Vec3(0, 0, 0), Vec3(1, 1, 1))})});
}

// Base block plus a slab sliding along axis.
inline ArticulatedObject slider(const Vec3& axis = Vec3::UnitX(), double lo = 0.0, double hi = 1.0) {
  Link slab{"slab", 0, prismatic(axis, lo, hi), {span(Vec3(0.2, -0.1, 0.3), Vec3(0.4, 0.1, 0.5))}};
  return ArticulatedObject("slider", "test", {base({span(Vec3(-0.5, 0.2, 0), Vec3(0.5, 0.4, 0.2))}), slab});
}

// Panel of width 0.6 hinged on the z axis through the origin, spanning
// x in [0.01, 0.6] at rest.
inline ArticulatedObject hinge(double lo = 0.0, double hi = 2.0) {
  Link panel{"panel", 0, revolute(Vec3::UnitZ(), Vec3::Zero(), lo, hi),
             {span(Vec3(0.01, -0.02, 0.1), Vec3(0.6, 0.0, 0.9))}};
  return ArticulatedObject("hinge", "test", {base({span(Vec3(-0.3, 0.05, 0), Vec3(-0.1, 0.5, 1.0))}), panel});
}

// Knob on a straight track heading +y from (0, 0, 0.5).
inline ArticulatedObject track() {
  Link knob{"knob", 0, path_joint(std::vector<Vec3>{Vec3(0, 0, 0.5), Vec3(0, 1, 0.5)}, 0.0, 1.0),
            {span(Vec3(-0.04, -0.04, 0.46), Vec3(0.04, 0.04, 0.54))}};
  return ArticulatedObject("track", "test", {base({span(Vec3(-0.5, 0.1, 0), Vec3(0.5, 1.2, 0.02))}), knob});
}

inline Eigen::VectorXd state(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline double deg(double rad) { return rad * 180.0 / std::numbers::pi; }
inline double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace umanip::testing
