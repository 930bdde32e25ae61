#include "umanip/structure_inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "umanip/error.hpp"

namespace umanip {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

Vec3 any_perpendicular(const Vec3& n) {
  const Vec3 seed = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(seed).normalized();
}

// Exact minimum of sum |cos(t) A_i + sin(t) B_i| over t: each term is
// concave between its zeros, so the minimum sits on a zero of some term.
std::pair<double, double> great_circle_search(const Vec3& n, const Vec3& u, std::span<const Vec3> dirs) {
  std::vector<double> candidates{0.0};
  for (const Vec3& a : dirs) {
    const double A = n.dot(a);
    const double B = u.dot(a);
    if (A == 0.0 && B == 0.0) continue;
    double t = std::atan2(-A, B);  // A cos t + B sin t = 0
    if (t < 0.0) t += std::numbers::pi;
    candidates.push_back(t);
  }
  double best_t = 0.0;
  double best_f = plane_objective(n, dirs);
  for (double t : candidates) {
    const Vec3 m = (std::cos(t) * n + std::sin(t) * u).normalized();
    const double f = plane_objective(m, dirs);
    if (f < best_f) {
      best_f = f;
      best_t = t;
    }
  }
  return {best_t, best_f};
}

// Weiszfeld iteration with the Vardi-Zhang correction at data points.
Eigen::Vector2d geometric_median(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d x = Eigen::Vector2d::Zero();
  for (const auto& p : pts) x += p;
  x /= static_cast<double>(pts.size());
  for (int iter = 0; iter < 10000; ++iter) {
    Eigen::Vector2d num = Eigen::Vector2d::Zero();
    Eigen::Vector2d pull = Eigen::Vector2d::Zero();
    double den = 0.0;
    int coincident = 0;
    for (const auto& p : pts) {
      const double d = (p - x).norm();
      if (d < 1e-15) {
        ++coincident;
        continue;
      }
      num += p / d;
      den += 1.0 / d;
      pull += (p - x) / d;
    }
    if (den == 0.0) return x;
    const Eigen::Vector2d t = num / den;
    Eigen::Vector2d next = t;
    if (coincident > 0) {
      const double r = pull.norm();
      if (r <= coincident) return x;
      const double w = coincident / r;
      next = (1.0 - w) * t + w * x;
    }
    const double moved = (next - x).norm();
    x = next;
    if (moved < 1e-14 * (1.0 + x.norm())) break;
  }
  return x;
}

}  // namespace

void ActionTrace::validate() const {
  if (directions.size() != grasp_positions.size()) {
    throw Error(ErrorKind::kShape, "trace directions and grasp positions differ in length");
  }
  for (const Vec3& a : directions) {
    if (std::abs(a.norm() - 1.0) > 1e-9) throw Error(ErrorKind::kArgument, "trace directions must be unit length");
  }
}

namespace {

bool ended_on_limit(const Transition& t, const ArticulatedObject& object) {
  for (Eigen::Index j = 0; j < t.j_curr.size(); ++j) {
    if (t.j_curr[j] == t.j_prev[j]) continue;
    const Joint& joint = object.joint(static_cast<std::size_t>(j));
    if (t.j_curr[j] <= joint.lower || t.j_curr[j] >= joint.upper) return true;
  }
  return false;
}

}  // namespace

ActionTrace trace_from_transitions(std::span<const Transition> transitions, const ArticulatedObject* object) {
  ActionTrace all;
  ActionTrace free;
  for (const Transition& t : transitions) {
    if (t.outcome.r_aot == AotLabel::kStill) continue;
    all.directions.push_back(t.action.direction);
    all.grasp_positions.push_back(t.action.position);
    if (object != nullptr && !ended_on_limit(t, *object)) {
      free.directions.push_back(t.action.direction);
      free.grasp_positions.push_back(t.action.position);
    }
  }
  if (object != nullptr && free.size() >= kMinTraceSteps) return free;
  return all;
}

const char* to_string(EstimateKind kind) { return kind == EstimateKind::kRevolute ? "revolute" : "prismatic"; }

ArticulationEstimate infer_prismatic(const ActionTrace& trace) {
  trace.validate();
  if (trace.size() < 2) throw Error(ErrorKind::kDegenerateTrace, "prismatic inference needs at least 2 steps");
  Vec3 sum = Vec3::Zero();
  for (const Vec3& a : trace.directions) sum += a.dot(trace.directions.front()) < 0.0 ? Vec3(-a) : a;
  const double norm = sum.norm();
  if (norm < 1e-6) throw Error(ErrorKind::kDegenerateTrace, "action directions cancel out");
  ArticulationEstimate e;
  e.kind = EstimateKind::kPrismatic;
  e.direction = sum / norm;
  double dev = 0.0;
  for (const Vec3& a : trace.directions) dev += std::acos(std::clamp(std::abs(a.dot(e.direction)), 0.0, 1.0));
  e.residual = dev / static_cast<double>(trace.size()) * kDeg;
  return e;
}

double plane_objective(const Vec3& normal, std::span<const Vec3> directions) {
  double f = 0.0;
  for (const Vec3& a : directions) f += std::abs(normal.dot(a));
  return f;
}

Vec3 fit_plane_normal(const ActionTrace& trace) {
  trace.validate();
  if (trace.size() < 3) throw Error(ErrorKind::kInsufficientData, "plane fit needs at least 3 steps");
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Vec3& a : trace.directions) scatter += a * a.transpose();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const Eigen::Vector3d values = eig.eigenvalues();  // ascending
  if (values[1] <= 1e-12 * values[2]) throw Error(ErrorKind::kRankDeficient, "action directions are collinear");
  Vec3 n = eig.eigenvectors().col(0).normalized();
  const std::span<const Vec3> dirs(trace.directions);
  double f = plane_objective(n, dirs);

  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<Vec3> moves;
    const Vec3 e1 = any_perpendicular(n);
    moves.push_back(e1);
    moves.push_back(n.cross(e1).normalized());
    for (const Vec3& a : dirs) {
      if (std::abs(n.dot(a)) < 1e-12) {
        const Vec3 along = a.cross(n);  // keeps n . a = 0
        if (along.norm() > 1e-12) moves.push_back(along.normalized());
      }
    }
    double best_f = f;
    Vec3 best_n = n;
    for (const Vec3& u : moves) {
      const auto [t, value] = great_circle_search(n, u, dirs);
      if (value < best_f) {
        best_f = value;
        best_n = (std::cos(t) * n + std::sin(t) * u).normalized();
      }
    }
    const double gain = f - best_f;
    n = best_n;
    f = best_f;
    if (gain < 1e-10) break;
  }
  return n;
}

ArticulationEstimate infer_revolute(const ActionTrace& trace) {
  const Vec3 n = fit_plane_normal(trace);
  const Vec3 e1 = any_perpendicular(n);
  const Vec3 e2 = n.cross(e1);
  double height = 0.0;
  for (const Vec3& p : trace.grasp_positions) height += n.dot(p);
  height /= static_cast<double>(trace.size());

  struct Line {
    Eigen::Vector2d origin;
    Eigen::Vector2d dir;
  };
  std::vector<Line> lines;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const Eigen::Vector2d a(e1.dot(trace.directions[t]), e2.dot(trace.directions[t]));
    if (a.norm() < 1e-9) continue;
    const Eigen::Vector2d q(e1.dot(trace.grasp_positions[t]), e2.dot(trace.grasp_positions[t]));
    lines.push_back({q, Eigen::Vector2d(-a.y(), a.x()).normalized()});
  }
  const double min_sin = std::sin(kMinIntersectionAngleDeg / kDeg);
  std::vector<Eigen::Vector2d> hits;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Eigen::Vector2d& mi = lines[i].dir;
      const Eigen::Vector2d& mj = lines[j].dir;
      const double cross = mi.x() * mj.y() - mi.y() * mj.x();
      if (std::abs(cross) < min_sin) continue;
      const Eigen::Vector2d d = lines[j].origin - lines[i].origin;
      const double s = (d.x() * mj.y() - d.y() * mj.x()) / cross;
      hits.push_back(lines[i].origin + s * mi);
    }
  }
  if (hits.size() < 2) throw Error(ErrorKind::kInsufficientData, "fewer than 2 well-conditioned line intersections");
  const Eigen::Vector2d c = geometric_median(hits);
  std::vector<double> dist;
  for (const auto& h : hits) dist.push_back((h - c).norm());
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2), dist.end());
  double median = dist[dist.size() / 2];
  if (dist.size() % 2 == 0) {
    const double lower = *std::max_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2));
    median = 0.5 * (median + lower);
  }

  ArticulationEstimate e;
  e.kind = EstimateKind::kRevolute;
  e.direction = n;
  e.point = c.x() * e1 + c.y() * e2 + height * n;
  e.residual = median;
  return e;
}

ArticulationEstimate infer_articulation(const ActionTrace& trace) {
  const ArticulationEstimate p = infer_prismatic(trace);
  if (p.residual < kPrismaticResidualDeg) return p;
  return infer_revolute(trace);
}

ArticulationEstimate ground_truth_axis(const ArticulatedObject& object, std::size_t joint, const JointState& state) {
  const Joint& jt = object.joint(joint);
  if (jt.kind == JointKind::kPath) throw Error(ErrorKind::kArgument, "path joints have no single axis");
  const std::vector<Pose> poses = forward_kinematics(object, state);
  const Pose& parent = poses[static_cast<std::size_t>(object.link(object.joint_link(joint)).parent)];
  ArticulationEstimate e;
  e.kind = jt.kind == JointKind::kRevolute ? EstimateKind::kRevolute : EstimateKind::kPrismatic;
  e.direction = (parent.linear() * jt.axis_direction).normalized();
  e.point = jt.kind == JointKind::kRevolute ? Vec3(parent * jt.axis_point) : Vec3::Zero();
  return e;
}

AxisError axis_error(const ArticulationEstimate& estimate, const ArticulationEstimate& truth) {
  if (estimate.kind != truth.kind) throw Error(ErrorKind::kArgument, "estimate and ground truth differ in kind");
  AxisError err;
  const Vec3 a = estimate.direction.normalized();
  const Vec3 b = truth.direction.normalized();
  err.angle_deg = std::atan2(a.cross(b).norm(), std::abs(a.dot(b))) * kDeg;
  if (truth.kind == EstimateKind::kRevolute) {
    const Vec3 d1 = estimate.direction.normalized();
    const Vec3 d2 = truth.direction.normalized();
    const Vec3 w = estimate.point - truth.point;
    const Vec3 cross = d1.cross(d2);
    if (cross.norm() < 1e-9) {
      err.point_distance = (w - w.dot(d2) * d2).norm();
    } else {
      err.point_distance = std::abs(w.dot(cross)) / cross.norm();
    }
  }
  return err;
}

}  // namespace umanip
