#pragma once

#include <array>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace umanip {

using Vec3 = Eigen::Vector3d;

// Triangle with outward winding (a, b, c). feature_edge[k] marks whether the
// edge starting at vertex k is a real crease of the solid, as opposed to a
// diagonal introduced by triangulating a planar face.
struct Triangle {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Vec3 c = Vec3::Zero();
  std::array<bool, 3> feature_edge{true, true, true};

  double area() const;
  // Unit outward normal; zero vector for degenerate triangles.
  Vec3 normal() const;
  // Point for barycentric-uniform coordinates (u, v) in [0,1)^2.
  Vec3 point_at(double u, double v) const;
};

// Axis-aligned box in the link's rest frame.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Zero();
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
};

using Shape = std::variant<Box, Mesh>;

std::vector<Triangle> triangulate(const Shape& shape);

// Distance from p (assumed on the triangle's plane) to the nearest feature
// edge; +infinity when the triangle has none.
double distance_to_feature_edge(const Triangle& tri, const Vec3& p);

double distance_point_segment(const Vec3& p, const Vec3& a, const Vec3& b);

}  // namespace umanip
