#include "umanip/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "umanip/error.hpp"
#include "umanip/object_io.hpp"
#include "umanip/rng.hpp"
#include "umanip/trajectory_log.hpp"

namespace umanip {

namespace {

using nlohmann::json;

constexpr std::uint64_t kExploreStream = 0x6578706c;
constexpr std::uint64_t kGoalStream = 0x676f616c;
constexpr std::uint64_t kObservationStream = 0x6f6273;

[[noreturn]] void config_error(const std::string& message) { throw Error(ErrorKind::kConfig, message); }

// Rejects keys outside allowed; path is only for messages.
void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) config_error(path + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) config_error(path + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& path) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(path + "." + key + ": wrong type");
  }
}

ExploreMode explore_mode_from_string(const std::string& s) {
  if (s == "forward") return ExploreMode::kForward;
  if (s == "contradictory") return ExploreMode::kContradictory;
  config_error("explore.mode: expected 'forward' or 'contradictory', got '" + s + "'");
}

const char* to_string(ExploreMode mode) { return mode == ExploreMode::kForward ? "forward" : "contradictory"; }

ScorerMode scorer_from_string(const std::string& s) {
  if (s == "oracle") return ScorerMode::kOracle;
  if (s == "learned") return ScorerMode::kLearned;
  config_error("baseline_scorer: expected 'oracle' or 'learned', got '" + s + "'");
}

void read_schedule(const json& j, const char* key, EpsilonSchedule& out, const std::string& path) {
  if (!j.contains(key)) return;
  const std::string sub = path + "." + key;
  check_keys(j.at(key), {"start", "min", "epochs"}, sub);
  read(j.at(key), "start", out.eps_start, sub);
  read(j.at(key), "min", out.eps_min, sub);
  read(j.at(key), "epochs", out.n_epochs, sub);
}

json schedule_json(const EpsilonSchedule& s) { return {{"start", s.eps_start}, {"min", s.eps_min}, {"epochs", s.n_epochs}}; }

void read_cem(const json& j, CemConfig& cem) {
  check_keys(j, {"n_samples", "temperature", "rounds", "noise_sigma"}, "cem");
  read(j, "n_samples", cem.n_samples, "cem");
  read(j, "temperature", cem.temperature, "cem");
  read(j, "rounds", cem.rounds, "cem");
  read(j, "noise_sigma", cem.noise_sigma, "cem");
}

void read_train(const json& j, TrainConfig& t) {
  const std::string p = "train";
  check_keys(j,
             {"epochs", "trajectories_per_epoch", "iterations_per_head", "initial_length", "growth_start",
              "growth_interval", "growth_step", "max_length", "position_epsilon", "direction_epsilon",
              "buffer_capacity", "checkpoint_every", "model", "loss"},
             p);
  read(j, "epochs", t.epochs, p);
  read(j, "trajectories_per_epoch", t.trajectories_per_epoch, p);
  read(j, "iterations_per_head", t.iterations_per_head, p);
  read(j, "initial_length", t.initial_length, p);
  read(j, "growth_start", t.growth_start, p);
  read(j, "growth_interval", t.growth_interval, p);
  read(j, "growth_step", t.growth_step, p);
  read(j, "max_length", t.max_length, p);
  read_schedule(j, "position_epsilon", t.position_epsilon, p);
  read_schedule(j, "direction_epsilon", t.direction_epsilon, p);
  read(j, "buffer_capacity", t.buffer_capacity, p);
  read(j, "checkpoint_every", t.checkpoint_every, p);
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, {"hidden_width", "init_range", "seed"}, "train.model");
    read(m, "hidden_width", t.model.hidden_width, "train.model");
    read(m, "init_range", t.model.init_range, "train.model");
    read(m, "seed", t.model.seed, "train.model");
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    check_keys(l, {"lambda", "learning_rate", "step_rule"}, "train.loss");
    read(l, "lambda", t.loss.lambda, "train.loss");
    read(l, "learning_rate", t.loss.learning_rate, "train.loss");
    std::string rule = to_string(t.loss.step_rule);
    read(l, "step_rule", rule, "train.loss");
    try {
      t.loss.step_rule = step_rule_from_string(rule);
    } catch (const Error& e) {
      config_error(std::string("train.loss.step_rule: ") + e.what());
    }
  }
}

json config_json(const ExperimentConfig& cfg) {
  json counts = json::object();
  for (const auto& [category, n] : cfg.generate.counts) counts[category] = n;
  json policies = json::array();
  for (BaselineKind k : cfg.policies) policies.push_back(to_string(k));
  const TrainConfig& t = cfg.train;
  return {
      {"suite", cfg.suite_path},
      {"generate", {{"seed", cfg.generate.seed}, {"counts", counts}}},
      {"policies", policies},
      {"baseline_scorer", cfg.baseline_scorer == ScorerMode::kOracle ? "oracle" : "learned"},
      {"checkpoint", cfg.checkpoint},
      {"seed", cfg.seed},
      {"workers", cfg.workers},
      {"log_trajectories", cfg.log_trajectories},
      {"cem",
       {{"n_samples", cfg.cem.n_samples},
        {"temperature", cfg.cem.temperature},
        {"rounds", cfg.cem.rounds},
        {"noise_sigma", cfg.cem.noise_sigma}}},
      {"train",
       {{"epochs", t.epochs},
        {"trajectories_per_epoch", t.trajectories_per_epoch},
        {"iterations_per_head", t.iterations_per_head},
        {"initial_length", t.initial_length},
        {"growth_start", t.growth_start},
        {"growth_interval", t.growth_interval},
        {"growth_step", t.growth_step},
        {"max_length", t.max_length},
        {"position_epsilon", schedule_json(t.position_epsilon)},
        {"direction_epsilon", schedule_json(t.direction_epsilon)},
        {"buffer_capacity", t.buffer_capacity},
        {"checkpoint_every", t.checkpoint_every},
        {"model", {{"hidden_width", t.model.hidden_width}, {"init_range", t.model.init_range}, {"seed", t.model.seed}}},
        {"loss",
         {{"lambda", t.loss.lambda},
          {"learning_rate", t.loss.learning_rate},
          {"step_rule", to_string(t.loss.step_rule)}}}}},
      {"explore",
       {{"episodes_per_object", cfg.explore.episodes_per_object},
        {"length", cfg.explore.length},
        {"mode", to_string(cfg.explore.mode)}}},
      {"goal", {{"episodes_per_task", cfg.goal.episodes_per_task}, {"probe_count", cfg.goal.probe_count}}},
  };
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

auto row_key(const ResultRow& r) { return std::tie(r.object_id, r.task, r.policy, r.episode); }

// Runs jobs on up to `workers` threads. Each job writes only its own slot.
// Returns true when the stop flag cut the run short.
bool run_jobs(std::size_t count, int workers, const std::atomic<bool>* stop,
              const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stopped{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      if (stop && stop->load()) {
        stopped = true;
        return;
      }
      {
        std::lock_guard lock(failure_mutex);
        if (failure) return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < n; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return stopped;
}

struct PolicySetup {
  BaselineKind kind;
  Agent agent;
};

std::vector<PolicySetup> make_agents(const ExperimentConfig& cfg, const PolicyModel* learned,
                                     const PolicyModel& oracle) {
  std::vector<PolicySetup> out;
  for (BaselineKind kind : cfg.policies) {
    const PolicyModel* model = &oracle;
    if (kind == BaselineKind::kOracle) {
      model = &oracle;
    } else if (kind == BaselineKind::kLearned || cfg.baseline_scorer == ScorerMode::kLearned) {
      if (!learned) config_error(std::string("policy '") + to_string(kind) + "' needs a learned checkpoint");
      model = learned;
    }
    out.push_back({kind, Agent{kind, model, cfg.cem}});
  }
  return out;
}

struct JobResult {
  ResultRow row;
  std::string log_name;
  std::vector<Transition> transitions;
  bool done = false;
};

RunOutput collect(std::vector<JobResult>& results, bool interrupted, const RunControl& control) {
  RunOutput out;
  out.interrupted = interrupted;
  std::vector<const JobResult*> done;
  for (const auto& r : results) {
    if (r.done) done.push_back(&r);
  }
  std::sort(done.begin(), done.end(), [](const JobResult* a, const JobResult* b) { return row_key(a->row) < row_key(b->row); });
  std::map<std::string, std::unique_ptr<TrajectoryLogWriter>> logs;
  if (control.trajectory_dir) std::filesystem::create_directories(*control.trajectory_dir);
  for (const JobResult* r : done) {
    out.rows.push_back(r->row);
    if (!control.trajectory_dir) continue;
    auto& log = logs[r->log_name];
    if (!log) log = std::make_unique<TrajectoryLogWriter>(*control.trajectory_dir / (r->log_name + ".jsonl"));
    for (const Transition& t : r->transitions) log->write(t);
  }
  for (auto& [name, log] : logs) log->flush();
  return out;
}

void fill_step_metrics(ResultRow& row, const EpisodeResult& result, const ArticulatedObject& object) {
  row.steps = result.steps();
  row.mean_d = result.step_effect.empty() ? 0.0 : mean(result.step_effect);
  row.unique_ratio = result.transitions.empty() ? -1.0 : unique_ratio(result.transitions, object.deltas());
  row.termination = to_string(result.termination);
}

}  // namespace

const char* library_version() { return UMANIP_VERSION; }

void ExperimentConfig::validate() const {
  if (suite_path.empty()) generate.validate();
  if (policies.empty()) config_error("policies: at least one policy is required");
  if (workers < 1) config_error("workers must be >= 1");
  cem.validate();
  train.validate();
  if (explore.episodes_per_object < 1) config_error("explore.episodes_per_object must be >= 1");
  if (explore.length < 1) config_error("explore.length must be >= 1");
  if (goal.episodes_per_task < 1) config_error("goal.episodes_per_task must be >= 1");
  if (goal.probe_count < 1) config_error("goal.probe_count must be >= 1");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"suite", "generate", "policies", "baseline_scorer", "checkpoint", "seed", "workers", "log_trajectories",
              "cem", "train", "explore", "goal"},
             "config");
  ExperimentConfig cfg;
  read(j, "suite", cfg.suite_path, "config");
  if (j.contains("generate")) {
    const json& g = j.at("generate");
    check_keys(g, {"seed", "counts"}, "generate");
    read(g, "seed", cfg.generate.seed, "generate");
    if (g.contains("counts")) {
      const json& c = g.at("counts");
      if (!c.is_object()) config_error("generate.counts: expected an object");
      cfg.generate.counts.clear();
      // Category order, not key order, so the suite order is stable.
      for (const std::string& category : object_categories()) {
        if (c.contains(category)) {
          int n = 0;
          read(c, category.c_str(), n, "generate.counts");
          cfg.generate.counts.emplace_back(category, n);
        }
      }
      for (const auto& [key, value] : c.items()) {
        const auto& cats = object_categories();
        if (std::find(cats.begin(), cats.end(), key) == cats.end()) config_error("generate.counts: unknown category '" + key + "'");
      }
    }
  }
  if (j.contains("policies")) {
    const json& p = j.at("policies");
    if (!p.is_array()) config_error("policies: expected an array");
    cfg.policies.clear();
    for (const json& name : p) {
      if (!name.is_string()) config_error("policies: expected strings");
      cfg.policies.push_back(baseline_from_string(name.get<std::string>()));
    }
  }
  std::string scorer = "oracle";
  read(j, "baseline_scorer", scorer, "config");
  cfg.baseline_scorer = scorer_from_string(scorer);
  read(j, "checkpoint", cfg.checkpoint, "config");
  read(j, "seed", cfg.seed, "config");
  read(j, "workers", cfg.workers, "config");
  read(j, "log_trajectories", cfg.log_trajectories, "config");
  if (j.contains("cem")) read_cem(j.at("cem"), cfg.cem);
  if (j.contains("train")) read_train(j.at("train"), cfg.train);
  cfg.train.cem = cfg.cem;
  if (j.contains("explore")) {
    const json& e = j.at("explore");
    check_keys(e, {"episodes_per_object", "length", "mode"}, "explore");
    read(e, "episodes_per_object", cfg.explore.episodes_per_object, "explore");
    read(e, "length", cfg.explore.length, "explore");
    std::string mode = to_string(cfg.explore.mode);
    read(e, "mode", mode, "explore");
    cfg.explore.mode = explore_mode_from_string(mode);
  }
  if (j.contains("goal")) {
    const json& g = j.at("goal");
    check_keys(g, {"episodes_per_task", "probe_count"}, "goal");
    read(g, "episodes_per_task", cfg.goal.episodes_per_task, "goal");
    read(g, "probe_count", cfg.goal.probe_count, "goal");
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfig) throw;
    config_error(e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& cfg) { return config_json(cfg).dump(); }

std::string config_hash(const ExperimentConfig& cfg) { return hash_hex(fnv1a(canonical_config(cfg))); }

std::vector<ArticulatedObject> load_experiment_suite(const ExperimentConfig& cfg) {
  if (!cfg.suite_path.empty()) {
    auto suite = load_suite(cfg.suite_path);
    if (suite.empty()) throw Error(ErrorKind::kConfig, "suite directory has no object files: " + cfg.suite_path);
    return suite;
  }
  return generate_suite(cfg.generate);
}

std::string csv_header() {
  return "object_id,task,policy,episode,steps,mean_D,unique_ratio,E_goal,success,termination";
}

std::string results_csv(std::vector<ResultRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) { return row_key(a) < row_key(b); });
  std::string out = csv_header() + "\n";
  for (const ResultRow& r : rows) {
    out += r.object_id + "," + r.task + "," + r.policy + "," + std::to_string(r.episode) + "," +
           std::to_string(r.steps) + "," + fixed(r.mean_d) + "," + (r.unique_ratio < 0 ? "" : fixed(r.unique_ratio)) +
           "," + (r.e_goal < 0 ? "" : fixed(r.e_goal)) + "," + (r.success < 0 ? "" : std::to_string(r.success)) + "," +
           r.termination + "\n";
  }
  return out;
}

std::string summary_json(const std::vector<ResultRow>& rows, const ExperimentConfig& cfg) {
  struct Acc {
    int episodes = 0;
    double steps = 0, mean_d = 0, unique = 0, e_goal = 0, success = 0;
    int unique_n = 0;
  };
  std::map<std::string, std::map<std::string, Acc>> groups;  // kind -> policy
  for (const ResultRow& r : rows) {
    Acc& a = groups[r.task == "explore" ? "explore" : "goal"][r.policy];
    ++a.episodes;
    a.steps += r.steps;
    a.mean_d += r.mean_d;
    if (r.unique_ratio >= 0) {
      a.unique += r.unique_ratio;
      ++a.unique_n;
    }
    if (r.e_goal >= 0) a.e_goal += r.e_goal;
    if (r.success >= 0) a.success += r.success;
  }
  json out;
  out["config_hash"] = config_hash(cfg);
  out["seed"] = cfg.seed;
  out["version"] = library_version();
  for (const auto& [kind, policies] : groups) {
    for (const auto& [policy, a] : policies) {
      json s;
      s["episodes"] = a.episodes;
      s["mean_steps"] = a.steps / a.episodes;
      s["mean_D"] = a.mean_d / a.episodes;
      s["unique_ratio"] = a.unique_n > 0 ? json(a.unique / a.unique_n) : json(nullptr);
      if (kind == "goal") {
        s["mean_E_goal"] = a.e_goal / a.episodes;
        s["success_rate"] = a.success / a.episodes;
      }
      out[kind][policy] = s;
    }
  }
  return out.dump(2) + "\n";
}

std::string manifest_json(const ExperimentConfig& cfg, const std::string& subcommand) {
  json m;
  m["subcommand"] = subcommand;
  m["version"] = library_version();
  m["seed"] = cfg.seed;
  m["config_hash"] = config_hash(cfg);
  m["config"] = config_json(cfg);
  return m.dump(2) + "\n";
}

RunOutput run_exploration(const ExperimentConfig& cfg, const std::vector<ArticulatedObject>& suite,
                          const PolicyModel* learned, const RunControl& control) {
  const PolicyModel oracle = PolicyModel::oracle();
  const auto agents = make_agents(cfg, learned, oracle);
  const std::size_t per_object = agents.size() * cfg.explore.episodes_per_object;
  std::vector<JobResult> results(suite.size() * per_object);
  ExploreOptions options;
  options.length = cfg.explore.length;
  options.mode = cfg.explore.mode;

  const bool stopped = run_jobs(results.size(), cfg.workers, control.stop, [&](std::size_t i) {
    const std::size_t o = i / per_object;
    const std::size_t a = (i % per_object) / cfg.explore.episodes_per_object;
    const std::size_t e = i % cfg.explore.episodes_per_object;
    const ArticulatedObject& object = suite[o];
    // Seeds depend on object and episode only, so every policy sees the
    // same observations and candidate draws.
    const std::uint64_t episode_seed = mix_seed(cfg.seed, mix_seed(kExploreStream, o), e);
    Environment env(object, object.lower_limits(), mix_seed(episode_seed, kObservationStream), e);
    const EpisodeResult r = explore_episode(env, agents[a].agent, options, episode_seed);
    JobResult& out = results[i];
    out.row.object_id = object.name();
    out.row.task = "explore";
    out.row.policy = to_string(agents[a].kind);
    out.row.episode = static_cast<int>(e);
    fill_step_metrics(out.row, r, object);
    out.log_name = object.name() + "__" + out.row.policy;
    if (control.trajectory_dir) out.transitions = r.transitions;
    out.done = true;
  });
  return collect(results, stopped, control);
}

RunOutput run_goal_evaluation(const ExperimentConfig& cfg, const std::vector<ArticulatedObject>& suite,
                              const PolicyModel* learned, const RunControl& control) {
  const PolicyModel oracle = PolicyModel::oracle();
  const auto agents = make_agents(cfg, learned, oracle);

  std::vector<std::vector<GoalTask>> tasks(suite.size());
  const bool tasks_stopped = run_jobs(suite.size(), cfg.workers, control.stop, [&](std::size_t o) {
    GoalTaskOptions options;
    options.observation_seed = mix_seed(cfg.seed, kGoalStream, o);
    options.probe_count = cfg.goal.probe_count;
    options.cem = cfg.cem;
    tasks[o] = make_goal_tasks(suite[o], options);
  });
  if (tasks_stopped) return {{}, true};

  struct Job {
    std::size_t object, task, agent;
    int episode;
  };
  std::vector<Job> jobs;
  for (std::size_t o = 0; o < suite.size(); ++o) {
    for (std::size_t t = 0; t < tasks[o].size(); ++t) {
      for (std::size_t a = 0; a < agents.size(); ++a) {
        // Current-observation-only rules have no way to condition on a goal.
        if (!agents[a].agent.uses_history()) continue;
        for (int e = 0; e < cfg.goal.episodes_per_task; ++e) jobs.push_back({o, t, a, e});
      }
    }
  }
  std::vector<JobResult> results(jobs.size());
  const bool stopped = run_jobs(jobs.size(), cfg.workers, control.stop, [&](std::size_t i) {
    const Job& job = jobs[i];
    const ArticulatedObject& object = suite[job.object];
    const GoalTask& task = tasks[job.object][job.task];
    const std::uint64_t episode_seed =
        mix_seed(cfg.seed, mix_seed(kGoalStream, job.object, job.task), static_cast<std::uint64_t>(job.episode));
    Environment env(object, task.j_init, task.observation_seed,
                    job.task * static_cast<std::uint64_t>(cfg.goal.episodes_per_task) + job.episode);
    const EpisodeResult r = goal_episode(env, agents[job.agent].agent, task, episode_seed);
    const GoalMetric g = goal_metric(r.final_state, task.j_goal, task.j_init, object.deltas());
    JobResult& out = results[i];
    out.row.object_id = object.name();
    out.row.task = task.name;
    out.row.policy = to_string(agents[job.agent].kind);
    out.row.episode = job.episode;
    fill_step_metrics(out.row, r, object);
    out.row.e_goal = g.e_goal;
    out.row.success = g.success ? 1 : 0;
    out.log_name = object.name() + "__" + out.row.policy + "__goal";
    if (control.trajectory_dir) out.transitions = r.transitions;
    out.done = true;
  });
  return collect(results, stopped, control);
}

std::string object_from_log_name(const std::filesystem::path& log_path) {
  const std::string stem = log_path.stem().string();
  const auto cut = stem.find("__");
  return cut == std::string::npos ? std::string() : stem.substr(0, cut);
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  const auto parent = std::filesystem::absolute(path).parent_path();
  std::error_code ec;
  std::filesystem::create_directories(parent, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create directory " + parent.string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

}  // namespace umanip
