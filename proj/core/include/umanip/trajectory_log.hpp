#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "umanip/interaction.hpp"

namespace umanip {

// 64-bit FNV-1a over point positions, normals, link ids and edge features.
std::uint64_t observation_hash(const Observation& obs);
std::string hash_hex(std::uint64_t hash);

// Sidecar path holding the observations referenced by a trajectory log:
// "run.jsonl" -> "run.observations.jsonl".
std::filesystem::path observation_sidecar(const std::filesystem::path& log_path);

// Line-delimited JSON writer; each observation is written once to the
// sidecar and referenced by hash. See docs/trajectory_log.md.
class TrajectoryLogWriter {
 public:
  explicit TrajectoryLogWriter(const std::filesystem::path& log_path);

  void write(const Transition& transition);
  void flush();

 private:
  std::string reference(const std::shared_ptr<const Observation>& obs);

  std::ofstream log_;
  std::ofstream sidecar_;
  std::set<std::uint64_t> written_;
};

std::vector<Transition> read_trajectory_log(const std::filesystem::path& log_path);

}  // namespace umanip
