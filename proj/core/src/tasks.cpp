#include "umanip/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "umanip/error.hpp"

namespace umanip {

namespace {

constexpr std::uint64_t kPositionStream = 0x706f73;
constexpr std::uint64_t kCandidateStream = 1;
constexpr std::uint64_t kSelectionStream = 2;

SelectionMode explore_mode_at(const ExploreOptions& o, int step) {
  if (o.mode == ExploreMode::kForward) return SelectionMode::kForward;
  return step < o.length / 2 ? SelectionMode::kForward : SelectionMode::kBackward;
}

struct StepRunner {
  Environment& env;
  const Agent& agent;
  std::uint64_t seed;
  EpisodeResult result;
  std::optional<SurfacePoint> pending_grasp;  // chosen but not yet attached
  std::optional<Vec3> previous_direction;

  SurfacePoint current_grasp() const { return env.grasp() ? *env.grasp() : *pending_grasp; }

  // Returns false when the selection rule asks to stop.
  bool run_step(SelectionMode mode, const Observation& obs_ref, const JointState& reference, double epsilon,
                ReplayBuffer* buffer) {
    const int step = env.steps_taken();
    DirectionContext ctx;
    ctx.mode = mode;
    ctx.obs_curr = env.observation().get();
    ctx.obs_ref = &obs_ref;
    ctx.grasp = current_grasp();
    ctx.truth = {&env.object(), env.state(), reference};
    ctx.previous_direction = previous_direction;
    ctx.epsilon = epsilon;
    const auto s = static_cast<std::uint64_t>(step);
    const DirectionDecision d = decide_direction(agent, ctx, mix_seed(seed, s, kCandidateStream),
                                                 mix_seed(seed, s, kSelectionStream));
    if (d.choice.terminate) return false;
    const Vec3 dir = d.candidates.directions[*d.choice.index];
    Transition t = env.step(Action{ctx.grasp.position, dir});
    previous_direction = dir;
    const Eigen::VectorXd deltas = env.object().deltas();
    result.step_effect.push_back(((t.j_curr - t.j_prev).array() / deltas.array()).matrix().norm());
    if (buffer != nullptr) buffer->push(t);
    result.transitions.push_back(std::move(t));
    return true;
  }
};

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::kBudgetExhausted:
      return "budget_exhausted";
    case Termination::kGoalTerminated:
      return "goal_terminated";
    case Termination::kNoValidPosition:
      return "no_valid_position";
  }
  return "unknown";
}

EpisodeResult explore_episode(Environment& env, const Agent& agent, const ExploreOptions& options,
                              std::uint64_t seed, ReplayBuffer* buffer) {
  if (options.length < 2) throw Error(ErrorKind::kArgument, "exploration length must be at least 2");
  if (agent.model == nullptr) throw Error(ErrorKind::kArgument, "agent has no policy model");
  const Observation& obs0 = *env.observation();
  if (obs0.size() == 0) throw Error(ErrorKind::kEnvironment, "observation has no surface points");

  StepRunner run{env, agent, seed, {}, std::nullopt, std::nullopt};
  Rng pos_rng(mix_seed(seed, kPositionStream));
  const double pos_eps = agent.kind == BaselineKind::kRandom ? 1.0 : options.position_epsilon;
  const std::vector<double> scores =
      agent.model->position.score(obs0, OracleView{&env.object(), env.state(), env.initial_state()});
  run.result.grasp_index = choose_position(scores, pos_eps, pos_rng);
  run.pending_grasp = obs0.points[*run.result.grasp_index];

  const std::shared_ptr<const Observation> obs_init = env.initial_observation();
  for (int step = 0; step < options.length; ++step) {
    run.run_step(explore_mode_at(options, step), *obs_init, env.initial_state(), options.direction_epsilon, buffer);
  }
  run.result.termination = Termination::kBudgetExhausted;
  run.result.final_state = env.state();
  return std::move(run.result);
}

std::vector<double> diff_mask_filter(const Observation& obs_init, const Observation& obs_goal,
                                     std::span<const double> position_scores) {
  if (obs_init.size() != obs_goal.size() || obs_init.size() != position_scores.size()) {
    throw Error(ErrorKind::kShape, "observations and scores must have corresponding points");
  }
  int max_link = 0;
  for (const SurfacePoint& p : obs_init.points) max_link = std::max(max_link, p.link);
  std::vector<char> moved_link(static_cast<std::size_t>(max_link) + 1, 0);
  for (std::size_t i = 0; i < obs_init.size(); ++i) {
    if ((obs_init.points[i].position - obs_goal.points[i].position).norm() > kDiffMaskThreshold) {
      moved_link[static_cast<std::size_t>(obs_init.points[i].link)] = 1;
    }
  }
  std::vector<double> out(position_scores.size(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (moved_link[static_cast<std::size_t>(obs_init.points[i].link)]) out[i] = position_scores[i];
  }
  return out;
}

EpisodeResult goal_episode(Environment& env, const Agent& agent, const GoalTask& task, std::uint64_t seed) {
  if (agent.model == nullptr) throw Error(ErrorKind::kArgument, "agent has no policy model");
  if (!task.obs_goal) throw Error(ErrorKind::kArgument, "goal task has no goal observation");
  const int max_steps = std::min(task.budget, kMaxGoalSteps);
  StepRunner run{env, agent, seed, {}, std::nullopt, std::nullopt};
  const Observation& obs0 = *env.observation();
  Rng pos_rng(mix_seed(seed, kPositionStream));
  const double pos_eps = agent.kind == BaselineKind::kRandom ? 1.0 : 0.0;
  const std::vector<double> scores =
      agent.model->position.score(obs0, OracleView{&env.object(), env.state(), task.j_goal});
  const std::vector<double> filtered = diff_mask_filter(obs0, *task.obs_goal, scores);
  run.result.grasp_index = choose_position(filtered, pos_eps, pos_rng, true);
  run.result.final_state = env.state();
  if (!run.result.grasp_index) {
    run.result.termination = Termination::kNoValidPosition;
    return std::move(run.result);
  }
  run.pending_grasp = obs0.points[*run.result.grasp_index];
  run.result.termination = Termination::kBudgetExhausted;
  for (int step = 0; step < max_steps; ++step) {
    if (!run.run_step(SelectionMode::kGoal, *task.obs_goal, task.j_goal, 0.0, nullptr)) {
      run.result.termination = Termination::kGoalTerminated;
      break;
    }
  }
  run.result.final_state = env.state();
  return std::move(run.result);
}

namespace {

GoalTask build_task(const ArticulatedObject& object, std::string name, JointState init, JointState goal,
                    std::uint64_t obs_seed) {
  GoalTask t;
  t.name = std::move(name);
  t.j_init = std::move(init);
  t.j_goal = std::move(goal);
  t.observation_seed = obs_seed;
  t.budget = std::min(object.step_budget(), kMaxGoalSteps);
  Environment env(object, t.j_init, obs_seed);
  t.obs_goal = env.observe(t.j_goal);
  return t;
}

int probe_successes(const ArticulatedObject& object, const GoalTask& task, const GoalTaskOptions& options,
                    const Agent& oracle) {
  int ok = 0;
  for (int p = 0; p < options.probe_count; ++p) {
    Environment env(object, task.j_init, task.observation_seed);
    const EpisodeResult r =
        goal_episode(env, oracle, task, mix_seed(options.observation_seed, 0x70726f6265, static_cast<std::uint64_t>(p)));
    if (goal_metric(r.final_state, task.j_goal, task.j_init, object.deltas()).success) ++ok;
  }
  return ok;
}

}  // namespace

std::vector<GoalTask> make_goal_tasks(const ArticulatedObject& object, const GoalTaskOptions& options) {
  if (object.joint_count() == 0) throw Error(ErrorKind::kUndefinedTask, "object has no movable joint");
  const PolicyModel model = PolicyModel::oracle();
  const Agent oracle{BaselineKind::kOracle, &model, options.cem};
  const JointState rest = object.lower_limits();

  struct Spec {
    const char* name;
    std::size_t joint;
    bool opening;
  };
  const Spec specs[] = {{"open", 0, true}, {"close", object.joint_count() - 1, false}};
  std::vector<GoalTask> tasks;
  for (const Spec& spec : specs) {
    const Joint& joint = object.joint(spec.joint);
    const auto j = static_cast<Eigen::Index>(spec.joint);
    JointState init = rest;
    JointState goal = rest;
    init[j] = spec.opening ? joint.lower : joint.upper;
    goal[j] = spec.opening ? joint.upper : joint.lower;
    const double toward = spec.opening ? 1.0 : -1.0;
    const double increment = options.pull_step * joint.delta;
    const auto max_pulls = static_cast<int>(std::floor(options.max_pull * joint.range() / increment));

    GoalTask best = build_task(object, spec.name, init, goal, options.observation_seed);
    int best_ok = -1;
    for (int k = 0; k <= max_pulls; ++k) {
      JointState pulled = init;
      pulled[j] = init[j] + toward * increment * k;
      GoalTask candidate = build_task(object, spec.name, pulled, goal, options.observation_seed);
      const int ok = probe_successes(object, candidate, options, oracle);
      if (ok > best_ok) {
        best = std::move(candidate);
        best_ok = ok;
      }
      if (ok == options.probe_count) break;
    }
    tasks.push_back(std::move(best));
  }
  return tasks;
}

}  // namespace umanip
