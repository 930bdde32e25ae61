#include "umanip/generators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "umanip/error.hpp"
#include "umanip/object_io.hpp"
#include "umanip/rng.hpp"

namespace umanip {

namespace {

struct CategoryInfo {
  const char* name;
  double mean_range;  // mean of the generator's joint range distribution
  double delta;
};

// Ranges match the generators below; toy_path uses the expected polyline length.
constexpr CategoryInfo kCategories[] = {
    {"door", 2.4, kRevoluteDelta},         {"lid", 1.85, kRevoluteDelta},
    {"drawer", 0.425, kPrismaticDelta},    {"slider", 0.5, kPrismaticDelta},
    {"double_door", 2.4, kRevoluteDelta},  {"toy_path", 0.99, kPrismaticDelta},
};

constexpr int kMaxBudget = 15;

constexpr double kPanel = 0.03;  // panel thickness, m

// Box from its min and max corners.
Box span_box(const Vec3& lo, const Vec3& hi) { return Box{0.5 * (lo + hi), 0.5 * (hi - lo)}; }

Link base_link(std::vector<Shape> shapes) { return Link{"base", -1, std::nullopt, std::move(shapes)}; }

Joint revolute(const Vec3& direction, const Vec3& point, double upper) {
  Joint j;
  j.kind = JointKind::kRevolute;
  j.axis_direction = direction;
  j.axis_point = point;
  j.lower = 0.0;
  j.upper = upper;
  j.delta = kRevoluteDelta;
  return j;
}

Joint prismatic(const Vec3& direction, double upper) {
  Joint j;
  j.kind = JointKind::kPrismatic;
  j.axis_direction = direction;
  j.lower = 0.0;
  j.upper = upper;
  j.delta = kPrismaticDelta;
  return j;
}

// Door panel in front of a cabinet face (y = 0), hinged on the vertical edge
// at x = hinge_x, spanning toward x = free_x.
Link door_panel(const std::string& id, double hinge_x, double free_x, double z0, double height, double range) {
  const double lo = std::min(hinge_x, free_x);
  const double hi = std::max(hinge_x, free_x);
  const double handle_x = free_x + (free_x > hinge_x ? -0.06 : 0.06);
  std::vector<Shape> shapes{
      span_box(Vec3(lo, -kPanel, z0), Vec3(hi, 0.0, z0 + height)),
      span_box(Vec3(handle_x - 0.015, -kPanel - 0.04, z0 + 0.4 * height),
               Vec3(handle_x + 0.015, -kPanel, z0 + 0.6 * height)),
  };
  // Positive rotation swings the free edge outward (toward -y).
  const Vec3 axis = free_x > hinge_x ? Vec3(0, 0, -1) : Vec3(0, 0, 1);
  return Link{id, 0, revolute(axis, Vec3(hinge_x, 0.0, 0.0), range), std::move(shapes)};
}

ArticulatedObject make_door(const std::string& name, Rng& rng) {
  const double width = rng.uniform(0.8, 1.0);
  const double height = rng.uniform(0.9, 1.4);
  const double depth = rng.uniform(0.4, 0.6);
  const double range = rng.uniform(2.2, 2.6);
  const double z0 = 0.05;
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(width, depth, z0 + height + 0.02))})};
  links.push_back(door_panel("door", 0.0, width, z0, height, range));
  return ArticulatedObject(name, "door", std::move(links), kDefaultSampleCount, category_budget("door"));
}

ArticulatedObject make_double_door(const std::string& name, Rng& rng) {
  const double half = rng.uniform(0.35, 0.5);
  const double height = rng.uniform(0.9, 1.4);
  const double depth = rng.uniform(0.4, 0.6);
  const double range_left = rng.uniform(2.2, 2.6);
  const double range_right = rng.uniform(2.2, 2.6);
  const double z0 = 0.05;
  const double gap = 0.004;
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(2 * half, depth, z0 + height + 0.02))})};
  links.push_back(door_panel("left_door", 0.0, half - gap, z0, height, range_left));
  links.push_back(door_panel("right_door", 2 * half, half + gap, z0, height, range_right));
  return ArticulatedObject(name, "double_door", std::move(links), kDefaultSampleCount,
                           category_budget("double_door"));
}

ArticulatedObject make_lid(const std::string& name, Rng& rng) {
  const double width = rng.uniform(0.3, 0.45);
  const double depth = rng.uniform(0.3, 0.45);
  const double body = rng.uniform(0.03, 0.12);
  const double range = rng.uniform(1.7, 2.0);
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(width, depth, body))})};
  // Hinge along the back top edge; positive rotation lifts the front edge.
  Link lid{"lid", 0, revolute(Vec3(-1, 0, 0), Vec3(0, depth, body), range),
           {span_box(Vec3(0, 0, body), Vec3(width, depth, body + kPanel / 2))}};
  links.push_back(std::move(lid));
  return ArticulatedObject(name, "lid", std::move(links), kDefaultSampleCount, category_budget("lid"));
}

ArticulatedObject make_drawer(const std::string& name, Rng& rng) {
  const double width = rng.uniform(0.4, 0.6);
  const double height = rng.uniform(0.5, 0.8);
  const double depth = rng.uniform(0.45, 0.6);
  const double travel = rng.uniform(0.35, 0.5);
  const double front_h = rng.uniform(0.15, 0.25);
  const double z0 = height - front_h - 0.03;
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(width, depth, height))})};
  Link drawer{"drawer", 0, prismatic(Vec3(0, -1, 0), travel),
              {span_box(Vec3(0.02, -kPanel, z0), Vec3(width - 0.02, 0.0, z0 + front_h)),
               span_box(Vec3(0.5 * width - 0.06, -kPanel - 0.035, z0 + 0.5 * front_h - 0.015),
                        Vec3(0.5 * width + 0.06, -kPanel, z0 + 0.5 * front_h + 0.015))}};
  links.push_back(std::move(drawer));
  return ArticulatedObject(name, "drawer", std::move(links), kDefaultSampleCount, category_budget("drawer"));
}

ArticulatedObject make_slider(const std::string& name, Rng& rng) {
  const double pane = rng.uniform(0.5, 0.7);
  const double height = rng.uniform(0.6, 1.0);
  const double travel = rng.uniform(0.4, 0.6);
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(2 * pane, 0.02, height))})};
  Link window{"pane", 0, prismatic(Vec3(1, 0, 0), travel),
              {span_box(Vec3(0.02, -0.04, 0.05), Vec3(pane, -0.01, height - 0.05))}};
  links.push_back(std::move(window));
  return ArticulatedObject(name, "slider", std::move(links), kDefaultSampleCount, category_budget("slider"));
}

ArticulatedObject make_toy_path(const std::string& name, Rng& rng) {
  const double pitch = rng.uniform(0.18, 0.24);
  const double rise = rng.uniform(0.16, 0.22);
  const int segments = 3 + static_cast<int>(rng.index(2));
  const double y = -0.05;
  std::vector<Vec3> path;
  for (int k = 0; k <= segments; ++k) {
    path.emplace_back(0.1 + k * pitch, y, 0.15 + (k % 2 == 1 ? rise : 0.0));
  }
  const double board_w = 0.2 + segments * pitch;
  std::vector<Link> links{base_link({span_box(Vec3(0, 0, 0), Vec3(board_w, 0.02, 0.3 + rise))})};
  Joint track;
  track.kind = JointKind::kPath;
  track.path = path;
  track.lower = 0.0;
  track.upper = track.path_length();
  track.delta = kPrismaticDelta;
  const Vec3 c = path.front();
  Link knob{"knob", 0, track, {span_box(c - Vec3(0.04, 0.03, 0.04), c + Vec3(0.04, 0.03, 0.04))}};
  links.push_back(std::move(knob));
  return ArticulatedObject(name, "toy_path", std::move(links), kDefaultSampleCount, category_budget("toy_path"));
}

std::size_t category_index(const std::string& category) {
  for (std::size_t i = 0; i < std::size(kCategories); ++i) {
    if (category == kCategories[i].name) return i;
  }
  throw Error(ErrorKind::kConfig, "unknown object category '" + category + "'");
}

}  // namespace

const std::vector<std::string>& object_categories() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& c : kCategories) v.emplace_back(c.name);
    return v;
  }();
  return names;
}

int category_budget(const std::string& category) {
  const CategoryInfo& c = kCategories[category_index(category)];
  const int steps = static_cast<int>(std::lround(c.mean_range / c.delta));
  return std::clamp(steps, 1, kMaxBudget);
}

ArticulatedObject generate_object(const std::string& category, int index, std::uint64_t seed) {
  const std::size_t c = category_index(category);
  Rng rng(mix_seed(seed, c, static_cast<std::uint64_t>(index)));
  char name[64];
  std::snprintf(name, sizeof name, "%s_%02d", category.c_str(), index);
  switch (c) {
    case 0:
      return make_door(name, rng);
    case 1:
      return make_lid(name, rng);
    case 2:
      return make_drawer(name, rng);
    case 3:
      return make_slider(name, rng);
    case 4:
      return make_double_door(name, rng);
    default:
      return make_toy_path(name, rng);
  }
}

void ObjectSuiteSpec::validate() const {
  if (counts.empty()) throw Error(ErrorKind::kConfig, "object suite has no categories");
  for (const auto& [category, n] : counts) {
    category_index(category);
    if (n < 0) throw Error(ErrorKind::kConfig, "negative instance count for " + category);
  }
}

ObjectSuiteSpec ObjectSuiteSpec::standard(std::uint64_t seed) {
  ObjectSuiteSpec s;
  for (const auto& c : kCategories) s.counts.emplace_back(c.name, 2);
  s.seed = seed;
  return s;
}

ObjectSuiteSpec ObjectSuiteSpec::starter(std::uint64_t seed) {
  return ObjectSuiteSpec{{{"door", 1}, {"drawer", 1}, {"lid", 1}}, seed};
}

ObjectSuiteSpec ObjectSuiteSpec::doors(int count, std::uint64_t seed) { return ObjectSuiteSpec{{{"door", count}}, seed}; }

std::vector<ArticulatedObject> generate_suite(const ObjectSuiteSpec& spec) {
  spec.validate();
  std::vector<ArticulatedObject> out;
  for (const auto& [category, n] : spec.counts) {
    for (int i = 0; i < n; ++i) out.push_back(generate_object(category, i, spec.seed));
  }
  return out;
}

std::vector<std::filesystem::path> gen_objects(const ObjectSuiteSpec& spec, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> paths;
  for (const ArticulatedObject& object : generate_suite(spec)) {
    const auto path = out_dir / (object.name() + ".json");
    save_object(object, path);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace umanip
