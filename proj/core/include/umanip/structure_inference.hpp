#pragma once

#include <span>
#include <vector>

#include "umanip/interaction.hpp"

namespace umanip {

struct ActionTrace {
  std::vector<Vec3> directions;       // unit action directions a_t
  std::vector<Vec3> grasp_positions;  // world grasp position when a_t was executed

  std::size_t size() const { return directions.size(); }
  void validate() const;
};

inline constexpr std::size_t kMinTraceSteps = 3;

// Trace of the steps with a significant state change (r_aot != 0). With an
// object, steps that ended on a joint limit are dropped too, since any
// direction inside a wide cone produces the same clamped motion; they are
// kept when fewer than kMinTraceSteps steps would remain.
ActionTrace trace_from_transitions(std::span<const Transition> transitions,
                                   const ArticulatedObject* object = nullptr);

enum class EstimateKind { kRevolute, kPrismatic };

const char* to_string(EstimateKind kind);

struct ArticulationEstimate {
  EstimateKind kind = EstimateKind::kPrismatic;
  Vec3 direction = Vec3::UnitX();
  Vec3 point = Vec3::Zero();  // revolute only
  // Prismatic: mean angular deviation from the estimate, degrees.
  // Revolute: median distance of the line intersections to the point, m.
  double residual = 0.0;
};

ArticulationEstimate infer_prismatic(const ActionTrace& trace);

// argmin over unit n of sum |n . a_t|, from the smallest eigenvector of
// sum a a^T refined by coordinate descent along great circles.
Vec3 fit_plane_normal(const ActionTrace& trace);
double plane_objective(const Vec3& normal, std::span<const Vec3> directions);

inline constexpr double kMinIntersectionAngleDeg = 5.0;

ArticulationEstimate infer_revolute(const ActionTrace& trace);

inline constexpr double kPrismaticResidualDeg = 10.0;

// Prismatic when its residual is under kPrismaticResidualDeg, else revolute.
ArticulationEstimate infer_articulation(const ActionTrace& trace);

struct AxisError {
  double angle_deg = 0.0;
  double point_distance = 0.0;
};

// Ground truth from a joint posed at the given parent-frame state.
ArticulationEstimate ground_truth_axis(const ArticulatedObject& object, std::size_t joint, const JointState& state);

AxisError axis_error(const ArticulationEstimate& estimate, const ArticulationEstimate& truth);

}  // namespace umanip
