#include "umanip/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umanip/error.hpp"

namespace umanip {

double Triangle::area() const { return 0.5 * (b - a).cross(c - a).norm(); }

Vec3 Triangle::normal() const {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  if (len <= 0.0) return Vec3::Zero();
  return n / len;
}

Vec3 Triangle::point_at(double u, double v) const {
  const double su = std::sqrt(u);
  return (1.0 - su) * a + su * (1.0 - v) * b + su * v * c;
}

double distance_point_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_feature_edge(const Triangle& tri, const Vec3& p) {
  const std::array<const Vec3*, 3> v{&tri.a, &tri.b, &tri.c};
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    if (!tri.feature_edge[k]) continue;
    best = std::min(best, distance_point_segment(p, *v[k], *v[(k + 1) % 3]));
  }
  return best;
}

namespace {

std::vector<Triangle> triangulate_box(const Box& box) {
  const Vec3& c = box.center;
  const Vec3& h = box.half_extents;
  if ((h.array() < 0.0).any()) {
    throw Error(ErrorKind::kGeometry, "box half extents must be non-negative");
  }
  auto corner = [&](int sx, int sy, int sz) {
    return Vec3(c.x() + sx * h.x(), c.y() + sy * h.y(), c.z() + sz * h.z());
  };
  // Each face listed counter-clockwise when viewed from outside.
  const std::array<std::array<Vec3, 4>, 6> faces{{
      {corner(1, -1, -1), corner(1, 1, -1), corner(1, 1, 1), corner(1, -1, 1)},
      {corner(-1, 1, -1), corner(-1, -1, -1), corner(-1, -1, 1), corner(-1, 1, 1)},
      {corner(1, 1, -1), corner(-1, 1, -1), corner(-1, 1, 1), corner(1, 1, 1)},
      {corner(-1, -1, -1), corner(1, -1, -1), corner(1, -1, 1), corner(-1, -1, 1)},
      {corner(-1, -1, 1), corner(1, -1, 1), corner(1, 1, 1), corner(-1, 1, 1)},
      {corner(-1, 1, -1), corner(1, 1, -1), corner(1, -1, -1), corner(-1, -1, -1)},
  }};
  std::vector<Triangle> out;
  out.reserve(12);
  for (const auto& f : faces) {
    out.push_back(Triangle{f[0], f[1], f[2], {true, true, false}});
    out.push_back(Triangle{f[0], f[2], f[3], {false, true, true}});
  }
  return out;
}

std::vector<Triangle> triangulate_mesh(const Mesh& mesh) {
  std::vector<Triangle> out;
  out.reserve(mesh.faces.size());
  const int n = static_cast<int>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= n) {
        throw Error(ErrorKind::kGeometry, "mesh face references vertex out of range");
      }
    }
    out.push_back(Triangle{mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]],
                           {true, true, true}});
  }
  return out;
}

}  // namespace

std::vector<Triangle> triangulate(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> std::vector<Triangle> {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Box>) {
          return triangulate_box(s);
        } else {
          return triangulate_mesh(s);
        }
      },
      shape);
}

}  // namespace umanip
