// umanip command-line front end. Exit codes: 0 success, 1 runtime error
// (including interruption), 2 configuration or usage error.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "umanip/error.hpp"
#include "umanip/experiment.hpp"
#include "umanip/object_io.hpp"
#include "umanip/structure_inference.hpp"
#include "umanip/trajectory_log.hpp"

namespace fs = std::filesystem;
using namespace umanip;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop = true; }

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> policies;
  std::string suite;
  std::optional<int> workers;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_policy) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Run seed; overrides the config");
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--suite", f.suite, "Directory of object files; overrides the config");
  cmd->add_option("--workers", f.workers, "Worker threads")->check(CLI::PositiveNumber);
  if (with_policy) {
    cmd->add_option("--policy", f.policies, "Policy kind; repeat for several")->take_all();
    cmd->add_option("--checkpoint", f.checkpoint, "Learned model checkpoint");
  }
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_experiment_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.suite.empty()) cfg.suite_path = f.suite;
  if (f.workers) cfg.workers = *f.workers;
  if (!f.checkpoint.empty()) cfg.checkpoint = f.checkpoint;
  if (!f.policies.empty()) {
    cfg.policies.clear();
    for (const auto& p : f.policies) cfg.policies.push_back(baseline_from_string(p));
  }
  cfg.train.cem = cfg.cem;
  cfg.validate();
  return cfg;
}

bool needs_learned(const ExperimentConfig& cfg) {
  if (cfg.baseline_scorer == ScorerMode::kLearned) return true;
  for (BaselineKind k : cfg.policies) {
    if (k == BaselineKind::kLearned) return true;
  }
  return false;
}

std::optional<PolicyModel> load_learned(const ExperimentConfig& cfg) {
  if (!needs_learned(cfg)) return std::nullopt;
  if (cfg.checkpoint.empty()) throw Error(ErrorKind::kConfig, "a learned policy needs --checkpoint or config.checkpoint");
  return load_checkpoint(cfg.checkpoint);
}

int finish(const fs::path& out, const ExperimentConfig& cfg, const std::string& subcommand,
           const std::vector<ResultRow>& rows, bool interrupted) {
  write_text_file(out / "results.csv", results_csv(rows));
  write_text_file(out / "summary.json", summary_json(rows, cfg));
  write_text_file(out / "manifest.json", manifest_json(cfg, subcommand));
  if (interrupted) {
    std::cerr << "interrupted: " << rows.size() << " completed episodes written to " << out.string() << "\n";
    return kExitRuntime;
  }
  std::cerr << rows.size() << " episodes written to " << out.string() << "\n";
  return kExitOk;
}

int cmd_gen_objects(const CommonFlags& f) {
  ExperimentConfig cfg = resolve(f);
  // The suite seed is the generator seed; --seed replaces it here.
  if (f.seed) cfg.generate.seed = *f.seed;
  const auto paths = gen_objects(cfg.generate, f.out);
  write_text_file(fs::path(f.out) / "manifest.json", manifest_json(cfg, "gen-objects"));
  std::cerr << paths.size() << " objects written to " << f.out << "\n";
  return kExitOk;
}

int cmd_explore(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const auto suite = load_experiment_suite(cfg);
  const auto learned = load_learned(cfg);
  const fs::path out = f.out;
  const fs::path traj = out / "trajectories";
  RunControl control{&g_stop, cfg.log_trajectories ? &traj : nullptr};
  const RunOutput r = run_exploration(cfg, suite, learned ? &*learned : nullptr, control);
  return finish(out, cfg, "explore", r.rows, r.interrupted);
}

int cmd_eval_goal(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const auto suite = load_experiment_suite(cfg);
  const auto learned = load_learned(cfg);
  const fs::path out = f.out;
  const fs::path traj = out / "trajectories";
  RunControl control{&g_stop, cfg.log_trajectories ? &traj : nullptr};
  const RunOutput r = run_goal_evaluation(cfg, suite, learned ? &*learned : nullptr, control);
  return finish(out, cfg, "eval-goal", r.rows, r.interrupted);
}

int cmd_bench(const CommonFlags& f) {
  const ExperimentConfig cfg = resolve(f);
  const auto suite = load_experiment_suite(cfg);
  const auto learned = load_learned(cfg);
  const fs::path out = f.out;
  const fs::path traj = out / "trajectories";
  RunControl control{&g_stop, cfg.log_trajectories ? &traj : nullptr};
  RunOutput r = run_exploration(cfg, suite, learned ? &*learned : nullptr, control);
  if (!r.interrupted) {
    RunOutput g = run_goal_evaluation(cfg, suite, learned ? &*learned : nullptr, control);
    r.rows.insert(r.rows.end(), g.rows.begin(), g.rows.end());
    r.interrupted = g.interrupted;
  }
  return finish(out, cfg, "bench", r.rows, r.interrupted);
}

int cmd_train(const CommonFlags& f) {
  ExperimentConfig cfg = resolve(f);
  const auto suite = load_experiment_suite(cfg);
  const fs::path out = f.out;
  fs::create_directories(out);
  cfg.train.checkpoint_path = (out / "checkpoint.json").string();
  write_text_file(out / "manifest.json", manifest_json(cfg, "train"));

  const auto on_epoch = [&](const EpochLog& log, const PolicyModel&) {
    if ((log.epoch + 1) % 100 == 0) {
      std::fprintf(stderr, "epoch %ld  len %d  pos %.4f  dist %.4f  aot %.4f  buffer %zu\n", log.epoch + 1,
                   log.length, log.position_loss, log.dist_loss, log.aot_loss, log.buffer_size);
    }
    return !g_stop.load();
  };
  const TrainingResult result = run_training(cfg.train, suite, cfg.seed, on_epoch);

  std::string csv = "epoch,length,position_epsilon,direction_epsilon,position_loss,dist_loss,aot_loss,buffer_size,"
                    "moved_episodes\n";
  for (const EpochLog& l : result.logs) {
    char line[256];
    std::snprintf(line, sizeof line, "%ld,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%zu,%d\n", l.epoch, l.length,
                  l.position_epsilon, l.direction_epsilon, l.position_loss, l.dist_loss, l.aot_loss, l.buffer_size,
                  l.moved_episodes);
    csv += line;
  }
  write_text_file(out / "train_log.csv", csv);
  save_checkpoint(result.model, cfg.train.checkpoint_path);
  if (result.interrupted) {
    std::cerr << "interrupted after " << result.logs.size() << " epochs; checkpoint written\n";
    return kExitRuntime;
  }
  std::cerr << "trained " << result.logs.size() << " epochs; checkpoint " << cfg.train.checkpoint_path << "\n";
  return kExitOk;
}

nlohmann::json vec_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

int cmd_infer_axis(const CommonFlags& f, const std::vector<std::string>& logs) {
  ExperimentConfig cfg = resolve(f);
  std::map<std::string, ArticulatedObject> objects;
  if (!f.config.empty() || !f.suite.empty()) {
    for (auto& o : load_experiment_suite(cfg)) objects.emplace(o.name(), std::move(o));
  }
  std::string lines;
  for (const auto& log_path : logs) {
    const auto transitions = read_trajectory_log(log_path);
    const std::string object_name = object_from_log_name(log_path);
    const auto found = objects.find(object_name);
    const ArticulatedObject* object = found == objects.end() ? nullptr : &found->second;

    std::map<std::uint64_t, std::vector<Transition>> episodes;
    for (const Transition& t : transitions) episodes[t.episode_id].push_back(t);
    for (const auto& [id, steps] : episodes) {
      nlohmann::json rec;
      rec["log"] = fs::path(log_path).filename().string();
      rec["object_id"] = object_name;
      rec["episode_id"] = id;
      const ActionTrace trace = trace_from_transitions(steps, object);
      rec["trace_steps"] = trace.size();
      try {
        const ArticulationEstimate est = infer_articulation(trace);
        rec["status"] = "ok";
        rec["kind"] = to_string(est.kind);
        rec["direction"] = vec_json(est.direction);
        if (est.kind == EstimateKind::kRevolute) rec["point"] = vec_json(est.point);
        rec["residual"] = est.residual;
        if (object) {
          const Eigen::VectorXd moved = (steps.back().j_curr - steps.front().j_init).cwiseAbs();
          Eigen::Index joint = 0;
          moved.maxCoeff(&joint);
          const ArticulationEstimate truth =
              ground_truth_axis(*object, static_cast<std::size_t>(joint), steps.front().j_init);
          const AxisError err = axis_error(est, truth);
          rec["joint"] = joint;
          rec["direction_error_deg"] = err.angle_deg;
          if (est.kind == EstimateKind::kRevolute && truth.kind == EstimateKind::kRevolute) {
            rec["point_error_m"] = err.point_distance;
          }
        }
      } catch (const Error& e) {
        rec["status"] = std::string(to_string(e.kind()));
        rec["message"] = e.what();
      }
      lines += rec.dump() + "\n";
    }
  }
  write_text_file(fs::path(f.out) / "axes.jsonl", lines);
  write_text_file(fs::path(f.out) / "manifest.json", manifest_json(cfg, "infer-axis"));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive articulated-object manipulation experiments"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);

  CommonFlags gen, explore, train, goal, infer, bench;
  std::vector<std::string> logs;
  auto* gen_cmd = app.add_subcommand("gen-objects", "Generate a procedural object suite");
  add_common(gen_cmd, gen, false);
  auto* explore_cmd = app.add_subcommand("explore", "Exploration evaluation across policies");
  add_common(explore_cmd, explore, true);
  auto* train_cmd = app.add_subcommand("train", "Self-supervised training of the learned scorers");
  add_common(train_cmd, train, false);
  auto* goal_cmd = app.add_subcommand("eval-goal", "Goal-conditioned evaluation");
  add_common(goal_cmd, goal, true);
  auto* infer_cmd = app.add_subcommand("infer-axis", "Joint axis estimation from trajectory logs");
  add_common(infer_cmd, infer, false);
  infer_cmd->add_option("logs", logs, "Trajectory log files")->required()->check(CLI::ExistingFile);
  auto* bench_cmd = app.add_subcommand("bench", "Exploration and goal evaluation, full matrix");
  add_common(bench_cmd, bench, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  std::signal(SIGINT, on_sigint);
  try {
    if (*gen_cmd) return cmd_gen_objects(gen);
    if (*explore_cmd) return cmd_explore(explore);
    if (*train_cmd) return cmd_train(train);
    if (*goal_cmd) return cmd_eval_goal(goal);
    if (*infer_cmd) return cmd_infer_axis(infer, logs);
    if (*bench_cmd) return cmd_bench(bench);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kConfig || e.kind() == ErrorKind::kSchema ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
