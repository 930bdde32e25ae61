#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "umanip/kinematics.hpp"

namespace umanip {

// Procedural categories, in generation order.
const std::vector<std::string>& object_categories();

// Interaction step budget N_step of a category.
int category_budget(const std::string& category);

// Deterministic in (category, index, seed). Throws kConfig for an unknown category.
ArticulatedObject generate_object(const std::string& category, int index, std::uint64_t seed);

struct ObjectSuiteSpec {
  std::vector<std::pair<std::string, int>> counts;  // category -> instances
  std::uint64_t seed = 0;

  void validate() const;
  static ObjectSuiteSpec standard(std::uint64_t seed = 0);  // two per category
  static ObjectSuiteSpec starter(std::uint64_t seed = 0);   // door, drawer, lid
  static ObjectSuiteSpec doors(int count, std::uint64_t seed = 0);
};

std::vector<ArticulatedObject> generate_suite(const ObjectSuiteSpec& spec);

// Writes <name>.json for every object of the suite; returns the paths.
std::vector<std::filesystem::path> gen_objects(const ObjectSuiteSpec& spec, const std::filesystem::path& out_dir);

}  // namespace umanip
