#include "umanip/trajectory_log.hpp"

#include <bit>
#include <cstdio>
#include <map>
#include <sstream>

#include <json.hpp>

#include "umanip/error.hpp"

namespace umanip {

using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, std::uint64_t word) {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffU;
    h *= kFnvPrime;
  }
}

void fnv_double(std::uint64_t& h, double v) { fnv_bytes(h, std::bit_cast<std::uint64_t>(v)); }

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

Vec3 json_vec3(const json& a) {
  if (!a.is_array() || a.size() != 3) throw Error(ErrorKind::kSchema, "expected a 3-vector in trajectory log");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

}  // namespace

std::uint64_t observation_hash(const Observation& obs) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < obs.points.size(); ++i) {
    const SurfacePoint& p = obs.points[i];
    for (int k = 0; k < 3; ++k) fnv_double(h, p.position[k]);
    for (int k = 0; k < 3; ++k) fnv_double(h, p.normal[k]);
    fnv_bytes(h, static_cast<std::uint64_t>(p.link));
    fnv_double(h, obs.features(static_cast<Eigen::Index>(i), 6));
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

std::filesystem::path observation_sidecar(const std::filesystem::path& log_path) {
  std::filesystem::path p = log_path;
  p.replace_extension(".observations.jsonl");
  return p;
}

TrajectoryLogWriter::TrajectoryLogWriter(const std::filesystem::path& log_path)
    : log_(log_path, std::ios::binary), sidecar_(observation_sidecar(log_path), std::ios::binary) {
  if (!log_ || !sidecar_) throw Error(ErrorKind::kIo, "cannot open trajectory log " + log_path.string());
}

std::string TrajectoryLogWriter::reference(const std::shared_ptr<const Observation>& obs) {
  const std::uint64_t h = observation_hash(*obs);
  if (written_.insert(h).second) {
    json points = json::array();
    for (std::size_t i = 0; i < obs->points.size(); ++i) {
      const SurfacePoint& p = obs->points[i];
      points.push_back(json::array({p.position.x(), p.position.y(), p.position.z(), p.normal.x(), p.normal.y(),
                                    p.normal.z(), p.link, obs->features(static_cast<Eigen::Index>(i), 6)}));
    }
    sidecar_ << json{{"hash", hash_hex(h)}, {"points", points}}.dump() << '\n';
  }
  return hash_hex(h);
}

void TrajectoryLogWriter::write(const Transition& t) {
  json rec;
  rec["episode_id"] = t.episode_id;
  rec["step_index"] = t.step_index;
  rec["action"] = {{"a_pos", vec3_json(t.action.position)}, {"a_dir", vec3_json(t.action.direction)}};
  rec["j_init"] = vec_json(t.j_init);
  rec["j_prev"] = vec_json(t.j_prev);
  rec["j_curr"] = vec_json(t.j_curr);
  rec["outcome"] = {{"r_dist", t.outcome.r_dist}, {"gamma", t.outcome.gamma},
                    {"r_aot", static_cast<int>(t.outcome.r_aot)}};
  rec["obs_prev"] = reference(t.obs_prev);
  rec["obs_init"] = reference(t.obs_init);
  log_ << rec.dump() << '\n';
  if (!log_ || !sidecar_) throw Error(ErrorKind::kIo, "failed writing trajectory log");
}

void TrajectoryLogWriter::flush() {
  log_.flush();
  sidecar_.flush();
}

std::vector<Transition> read_trajectory_log(const std::filesystem::path& log_path) {
  std::map<std::string, std::shared_ptr<const Observation>> observations;
  {
    std::ifstream side(observation_sidecar(log_path));
    std::string line;
    while (side && std::getline(side, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      std::vector<SurfacePoint> points;
      std::vector<double> edges;
      for (const auto& p : rec.at("points")) {
        SurfacePoint sp;
        sp.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
        sp.normal = Vec3(p[3].get<double>(), p[4].get<double>(), p[5].get<double>());
        sp.link = p[6].get<int>();
        points.push_back(sp);
        edges.push_back(p[7].get<double>());
      }
      observations[rec.at("hash").get<std::string>()] =
          std::make_shared<const Observation>(make_observation(std::move(points), edges));
    }
  }
  std::ifstream in(log_path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open trajectory log " + log_path.string());
  auto lookup = [&](const json& ref) -> std::shared_ptr<const Observation> {
    auto it = observations.find(ref.get<std::string>());
    return it == observations.end() ? nullptr : it->second;
  };
  std::vector<Transition> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      Transition t;
      t.episode_id = rec.at("episode_id").get<std::uint64_t>();
      t.step_index = rec.at("step_index").get<int>();
      t.action.position = json_vec3(rec.at("action").at("a_pos"));
      t.action.direction = json_vec3(rec.at("action").at("a_dir"));
      t.j_init = json_vec(rec.at("j_init"));
      t.j_prev = json_vec(rec.at("j_prev"));
      t.j_curr = json_vec(rec.at("j_curr"));
      t.outcome.r_dist = rec.at("outcome").at("r_dist").get<double>();
      t.outcome.gamma = rec.at("outcome").at("gamma").get<double>();
      t.outcome.r_aot = static_cast<AotLabel>(rec.at("outcome").at("r_aot").get<int>());
      t.obs_prev = lookup(rec.at("obs_prev"));
      t.obs_init = lookup(rec.at("obs_init"));
      out.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kSchema, log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace umanip
