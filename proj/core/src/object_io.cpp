#include "umanip/object_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "umanip/error.hpp"

namespace umanip {

using nlohmann::json;

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorKind::kSchema, where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!ok.contains(key)) throw Error(ErrorKind::kSchema, "unknown field '" + key + "' in " + where);
  }
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw Error(ErrorKind::kSchema, "missing field '" + std::string(key) + "' in " + where);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kSchema, "field '" + std::string(key) + "' in " + where + ": " + e.what());
  }
}

Vec3 to_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorKind::kSchema, where + " must be a 3-vector");
  Vec3 v;
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) throw Error(ErrorKind::kSchema, where + " must be numeric");
    v[k] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return v;
}

json from_vec3(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Shape parse_shape(const json& j, const std::string& where) {
  const auto type = get_field<std::string>(j, "type", where);
  if (type == "box") {
    require_keys(j, {"type", "center", "half_extents"}, where);
    return Box{to_vec3(j.at("center"), where + ".center"), to_vec3(j.at("half_extents"), where + ".half_extents")};
  }
  if (type == "mesh") {
    require_keys(j, {"type", "vertices", "faces"}, where);
    Mesh mesh;
    for (const auto& v : j.at("vertices")) mesh.vertices.push_back(to_vec3(v, where + ".vertices"));
    for (const auto& f : j.at("faces")) {
      if (!f.is_array() || f.size() != 3) throw Error(ErrorKind::kSchema, where + ".faces entries must be index triples");
      mesh.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    return mesh;
  }
  throw Error(ErrorKind::kSchema, "unknown shape type '" + type + "' in " + where);
}

json shape_to_json(const Shape& shape) {
  if (const auto* box = std::get_if<Box>(&shape)) {
    return json{{"type", "box"}, {"center", from_vec3(box->center)}, {"half_extents", from_vec3(box->half_extents)}};
  }
  const auto& mesh = std::get<Mesh>(shape);
  json verts = json::array();
  for (const auto& v : mesh.vertices) verts.push_back(from_vec3(v));
  json faces = json::array();
  for (const auto& f : mesh.faces) faces.push_back(json::array({f[0], f[1], f[2]}));
  return json{{"type", "mesh"}, {"vertices", verts}, {"faces", faces}};
}

JointKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "revolute") return JointKind::kRevolute;
  if (s == "prismatic") return JointKind::kPrismatic;
  if (s == "path") return JointKind::kPath;
  throw Error(ErrorKind::kSchema, "unknown joint kind '" + s + "' in " + where);
}

Vec3 unit(const Vec3& v, const std::string& where) {
  const double n = v.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::kSchema, where + " must be non-zero");
  return v / n;
}

}  // namespace

ArticulatedObject parse_object(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kSchema, std::string("malformed object spec: ") + e.what());
  }
  require_keys(root, {"name", "category", "step_budget", "surface_sample_count", "links", "joints"}, "object");
  const auto name = get_field<std::string>(root, "name", "object");
  const auto category = root.value("category", std::string("generic"));
  const int budget = root.value("step_budget", 10);
  const auto count = root.value("surface_sample_count", static_cast<std::size_t>(kDefaultSampleCount));

  const json& jlinks = root.at("links");
  if (!jlinks.is_array() || jlinks.empty()) throw Error(ErrorKind::kSchema, "links must be a non-empty array");
  std::vector<Link> links;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < jlinks.size(); ++i) {
    const json& jl = jlinks[i];
    const std::string where = "links[" + std::to_string(i) + "]";
    require_keys(jl, {"id", "parent", "shapes"}, where);
    Link link;
    link.id = get_field<std::string>(jl, "id", where);
    if (jl.contains("parent")) {
      const auto parent = get_field<std::string>(jl, "parent", where);
      auto it = index.find(parent);
      if (it == index.end()) throw Error(ErrorKind::kSchema, where + " parent '" + parent + "' is not an earlier link");
      link.parent = it->second;
    }
    if (jl.contains("shapes")) {
      for (std::size_t s = 0; s < jl.at("shapes").size(); ++s) {
        link.shapes.push_back(parse_shape(jl.at("shapes")[s], where + ".shapes[" + std::to_string(s) + "]"));
      }
    }
    index[link.id] = static_cast<int>(i);
    links.push_back(std::move(link));
  }

  const json jjoints = root.value("joints", json::array());
  for (std::size_t i = 0; i < jjoints.size(); ++i) {
    const json& jj = jjoints[i];
    const std::string where = "joints[" + std::to_string(i) + "]";
    require_keys(jj, {"link", "kind", "axis_direction", "axis_point", "path", "limits", "delta"}, where);
    const auto link_id = get_field<std::string>(jj, "link", where);
    auto it = index.find(link_id);
    if (it == index.end()) throw Error(ErrorKind::kSchema, where + " names unknown link '" + link_id + "'");
    Link& link = links[static_cast<std::size_t>(it->second)];
    if (link.joint) throw Error(ErrorKind::kSchema, "link '" + link_id + "' has more than one joint");
    Joint joint;
    joint.kind = parse_kind(get_field<std::string>(jj, "kind", where), where);
    if (jj.contains("axis_direction")) joint.axis_direction = unit(to_vec3(jj.at("axis_direction"), where), where + ".axis_direction");
    if (jj.contains("axis_point")) joint.axis_point = to_vec3(jj.at("axis_point"), where + ".axis_point");
    if (jj.contains("path")) {
      for (const auto& p : jj.at("path")) joint.path.push_back(to_vec3(p, where + ".path"));
    }
    const auto limits = get_field<std::vector<double>>(jj, "limits", where);
    if (limits.size() != 2) throw Error(ErrorKind::kSchema, where + ".limits must be [lo, hi]");
    joint.lower = limits[0];
    joint.upper = limits[1];
    joint.delta = jj.contains("delta") ? get_field<double>(jj, "delta", where) : default_delta(joint.kind);
    link.joint = std::move(joint);
  }
  return ArticulatedObject(name, category, std::move(links), count, budget);
}

std::string serialize_object(const ArticulatedObject& object) {
  json root;
  root["name"] = object.name();
  root["category"] = object.category();
  root["step_budget"] = object.step_budget();
  root["surface_sample_count"] = object.surface_sample_count();
  json links = json::array();
  json joints = json::array();
  for (const Link& link : object.links()) {
    json jl;
    jl["id"] = link.id;
    if (link.parent >= 0) jl["parent"] = object.link(link.parent).id;
    json shapes = json::array();
    for (const Shape& s : link.shapes) shapes.push_back(shape_to_json(s));
    jl["shapes"] = shapes;
    links.push_back(jl);
    if (link.joint) {
      const Joint& j = *link.joint;
      json jj;
      jj["link"] = link.id;
      jj["kind"] = to_string(j.kind);
      if (j.kind != JointKind::kPath) jj["axis_direction"] = from_vec3(j.axis_direction);
      if (j.kind == JointKind::kRevolute) jj["axis_point"] = from_vec3(j.axis_point);
      if (j.kind == JointKind::kPath) {
        json path = json::array();
        for (const auto& p : j.path) path.push_back(from_vec3(p));
        jj["path"] = path;
      }
      jj["limits"] = json::array({j.lower, j.upper});
      if (j.delta != default_delta(j.kind)) jj["delta"] = j.delta;
      joints.push_back(jj);
    }
  }
  root["links"] = links;
  root["joints"] = joints;
  return root.dump(2) + "\n";
}

ArticulatedObject load_object(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open object file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_object(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_object(const ArticulatedObject& object, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write object file " + path.string());
  out << serialize_object(object);
  if (!out) throw Error(ErrorKind::kIo, "failed writing object file " + path.string());
}

std::vector<ArticulatedObject> load_suite(const std::filesystem::path& directory) {
  if (!std::filesystem::is_directory(directory)) {
    throw Error(ErrorKind::kIo, "suite directory not found: " + directory.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(directory)) {
    const auto& path = entry.path();
    if (entry.is_regular_file() && path.extension() == ".json" && path.filename() != "manifest.json") {
      files.push_back(path);
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ArticulatedObject> suite;
  for (const auto& f : files) suite.push_back(load_object(f));
  if (suite.empty()) throw Error(ErrorKind::kIo, "suite directory has no object files: " + directory.string());
  return suite;
}

}  // namespace umanip
