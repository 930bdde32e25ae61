#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "umanip/kinematics.hpp"

namespace umanip {

// Object spec files are JSON documents; see docs/object_spec.md for the
// schema. Unknown fields are rejected at every level.
ArticulatedObject parse_object(const std::string& json_text);
std::string serialize_object(const ArticulatedObject& object);

ArticulatedObject load_object(const std::filesystem::path& path);
void save_object(const ArticulatedObject& object, const std::filesystem::path& path);

// Every *.json object file in a directory except manifest.json, in
// lexicographic filename order.
std::vector<ArticulatedObject> load_suite(const std::filesystem::path& directory);

}  // namespace umanip
