#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "umanip/agent.hpp"
#include "umanip/generators.hpp"
#include "umanip/tasks.hpp"
#include "umanip/training.hpp"

namespace umanip {

const char* library_version();

struct ExploreEvalConfig {
  int episodes_per_object = 10;
  int length = 8;
  ExploreMode mode = ExploreMode::kForward;
  bool operator==(const ExploreEvalConfig&) const = default;
};

struct GoalEvalConfig {
  int episodes_per_task = 1;
  int probe_count = 3;
  bool operator==(const GoalEvalConfig&) const = default;
};

// Everything a run depends on. See docs/config.md for the file format.
struct ExperimentConfig {
  std::string suite_path;            // directory of object files; empty -> generate
  ObjectSuiteSpec generate = ObjectSuiteSpec::standard();
  std::vector<BaselineKind> policies{BaselineKind::kOracle};
  ScorerMode baseline_scorer = ScorerMode::kOracle;  // scorers behind the non-learned rules
  std::string checkpoint;            // learned model file
  std::uint64_t seed = 0;
  int workers = 1;
  bool log_trajectories = false;
  CemConfig cem;
  TrainConfig train;
  ExploreEvalConfig explore;
  GoalEvalConfig goal;

  void validate() const;
};

// Missing keys keep their defaults; unknown keys are a kConfig error.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Canonical JSON form (sorted keys, every field present).
std::string canonical_config(const ExperimentConfig& cfg);
// 16 hex digits of FNV-1a over canonical_config.
std::string config_hash(const ExperimentConfig& cfg);

std::vector<ArticulatedObject> load_experiment_suite(const ExperimentConfig& cfg);

struct ResultRow {
  std::string object_id;
  std::string task;  // "explore" or the goal task name
  std::string policy;
  int episode = 0;
  int steps = 0;
  double mean_d = 0.0;
  double unique_ratio = -1.0;  // < 0 when undefined (no steps)
  double e_goal = -1.0;        // < 0 for exploration rows
  int success = -1;            // -1 for exploration rows
  std::string termination;

  bool operator==(const ResultRow&) const = default;
};

std::string csv_header();
// Rows sorted by (object_id, task, policy, episode), fixed 6-digit decimals.
std::string results_csv(std::vector<ResultRow> rows);
std::string summary_json(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg);
std::string manifest_json(const ExperimentConfig& cfg, const std::string& subcommand);

struct RunControl {
  const std::atomic<bool>* stop = nullptr;      // checked between episodes
  // When set, transitions go to <dir>/<object>__<policy>[__goal].jsonl with
  // the episode number as episode id.
  const std::filesystem::path* trajectory_dir = nullptr;
};

// Object name encoded in a trajectory log file name, or empty.
std::string object_from_log_name(const std::filesystem::path& log_path);

struct RunOutput {
  std::vector<ResultRow> rows;
  bool interrupted = false;
};

// learned may be null when no learned scorer is needed.
RunOutput run_exploration(const ExperimentConfig& cfg, const std::vector<ArticulatedObject>& suite,
                          const PolicyModel* learned, const RunControl& control = {});
// Policies without history (SingleStep, HeuristicFilter) are skipped.
RunOutput run_goal_evaluation(const ExperimentConfig& cfg, const std::vector<ArticulatedObject>& suite,
                              const PolicyModel* learned, const RunControl& control = {});

// Writes text to path, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace umanip
