#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "umanip/error.hpp"
#include "umanip/generators.hpp"
#include "umanip/object_io.hpp"

namespace umanip {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("umanip_gen_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Generators, SeedSevenIsByteIdentical) {
  const auto a = gen_objects(ObjectSuiteSpec::standard(7), scratch("a"));
  const auto b = gen_objects(ObjectSuiteSpec::standard(7), scratch("b"));
  ASSERT_EQ(a.size(), 12u);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].filename(), b[i].filename());
    EXPECT_EQ(slurp(a[i]), slurp(b[i])) << a[i];
  }
  const auto c = gen_objects(ObjectSuiteSpec::standard(8), scratch("c"));
  EXPECT_NE(slurp(a[0]), slurp(c[0]));
}

TEST(Generators, DoorIsVerticalRevolute) {
  for (int i = 0; i < 5; ++i) {
    const auto door = generate_object("door", i, 7);
    ASSERT_EQ(door.joint_count(), 1u);
    const Joint& j = door.joint(0);
    EXPECT_EQ(j.kind, JointKind::kRevolute);
    EXPECT_DOUBLE_EQ(j.delta, 0.15);
    EXPECT_NEAR(std::abs(j.axis_direction.z()), 1.0, 1e-12);
    EXPECT_GT(j.range(), 0.0);
  }
}

TEST(Generators, DrawerIsHorizontalPrismatic) {
  const auto drawer = generate_object("drawer", 0, 7);
  const Joint& j = drawer.joint(0);
  EXPECT_EQ(j.kind, JointKind::kPrismatic);
  EXPECT_DOUBLE_EQ(j.delta, 0.15);
  EXPECT_NEAR(j.axis_direction.z(), 0.0, 1e-12);
}

TEST(Generators, ToyPathIsZigZag) {
  for (int i = 0; i < 3; ++i) {
    const auto toy = generate_object("toy_path", i, 7);
    const Joint& j = toy.joint(0);
    ASSERT_EQ(j.kind, JointKind::kPath);
    ASSERT_GE(j.path.size(), 4u);  // at least 3 segments
    int turns = 0;
    for (std::size_t k = 1; k + 1 < j.path.size(); ++k) {
      const Vec3 u = (j.path[k] - j.path[k - 1]).normalized();
      const Vec3 v = (j.path[k + 1] - j.path[k]).normalized();
      turns += u.cross(v).norm() > 1e-3;
    }
    EXPECT_GE(turns, 2);
  }
}

TEST(Generators, BudgetsAndCategories) {
  const std::vector<std::string> expected{"door", "lid", "drawer", "slider", "double_door", "toy_path"};
  EXPECT_EQ(object_categories(), expected);
  EXPECT_EQ(category_budget("door"), 15);
  EXPECT_EQ(category_budget("lid"), 12);
  EXPECT_EQ(category_budget("drawer"), 3);
  EXPECT_EQ(category_budget("slider"), 3);
  EXPECT_EQ(category_budget("double_door"), 15);
  EXPECT_EQ(category_budget("toy_path"), 7);
  try {
    generate_object("teapot", 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfig);
  }
}

TEST(Generators, SuiteObjectsValidate) {
  // Every generated object survives the schema-checking loader.
  for (const auto& obj : generate_suite(ObjectSuiteSpec::standard(3))) {
    const auto back = parse_object(serialize_object(obj));
    EXPECT_EQ(back.name(), obj.name());
    EXPECT_GE(obj.step_budget(), 1);
    EXPECT_LE(obj.step_budget(), 15);
    EXPECT_TRUE(obj.within_limits(obj.lower_limits()));
  }
  EXPECT_EQ(generate_suite(ObjectSuiteSpec::starter()).size(), 3u);
  EXPECT_EQ(generate_suite(ObjectSuiteSpec::doors(4)).size(), 4u);
}

TEST(ObjectIo, RoundTripIsStable) {
  for (const auto& obj : generate_suite(ObjectSuiteSpec::standard(11))) {
    const std::string text = serialize_object(obj);
    EXPECT_EQ(serialize_object(parse_object(text)), text) << obj.name();
  }
}

TEST(ObjectIo, SaveLoadSuite) {
  const fs::path dir = scratch("suite");
  const auto paths = gen_objects(ObjectSuiteSpec::starter(2), dir);
  std::ofstream(dir / "manifest.json") << "{}";
  const auto suite = load_suite(dir);
  ASSERT_EQ(suite.size(), paths.size());
  for (std::size_t i = 1; i < suite.size(); ++i) EXPECT_LT(suite[i - 1].name(), suite[i].name());
  EXPECT_EQ(serialize_object(load_object(paths[0])), slurp(paths[0]));
}

TEST(ObjectIo, RejectsUnknownFields) {
  const auto door = generate_object("door", 0, 7);
  auto expect_schema = [](const std::string& text) {
    try {
      parse_object(text);
      FAIL() << text.substr(0, 80);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kSchema);
    }
  };
  std::string text = serialize_object(door);
  std::string top = text;
  top.insert(top.find('{') + 1, "\"colour\": 1,");
  expect_schema(top);
  std::string nested = text;
  nested.insert(nested.find("\"kind\""), "\"stiffness\": 2,");
  expect_schema(nested);
  expect_schema("not json");
  expect_schema("[]");
}

TEST(ObjectIo, MissingFileIsIoError) {
  try {
    load_object("/nonexistent/door.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

}  // namespace
}  // namespace umanip
