#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "umanip/error.hpp"
#include "umanip/generators.hpp"
#include "umanip/metrics.hpp"
#include "umanip/tasks.hpp"
#include "umanip/training.hpp"

namespace umanip {
namespace {

using namespace umanip::testing;

const PolicyModel& oracle_model() {
  static const PolicyModel m = PolicyModel::oracle();
  return m;
}

Agent oracle_agent() { return Agent{BaselineKind::kOracle, &oracle_model(), CemConfig{}}; }

TEST(Metrics, SingleActionEffect) {
  const std::vector<JointState> before{state({0.0}), state({0.3}), state({0.0})};
  const std::vector<JointState> after{state({0.15}), state({0.3}), state({0.3})};
  const auto d = single_action_effect(before, after, state({0.15}));
  EXPECT_NEAR(d[0], 1.0, 1e-12);
  EXPECT_EQ(d[1], 0.0);
  EXPECT_NEAR(d[2], 2.0, 1e-12);
}

TEST(Metrics, UniqueRatioExamples) {
  const auto deltas = state({0.15});
  std::vector<JointState> mono;
  for (int i = 1; i <= 5; ++i) mono.push_back(state({0.2 * i}));
  EXPECT_DOUBLE_EQ(unique_ratio(mono, deltas), 1.0);
  // A -> B -> A -> B starting from A: post-step states B, A, B, A.
  const std::vector<JointState> osc{state({0.5}), state({0.0}), state({0.5}), state({0.0})};
  EXPECT_DOUBLE_EQ(unique_ratio(osc, deltas), 0.5);
  const std::vector<JointState> still{state({0.01}), state({0.02}), state({0.03}), state({0.05})};
  EXPECT_DOUBLE_EQ(unique_ratio(still, deltas), 0.25);
  try {
    unique_ratio(std::vector<JointState>{}, deltas);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kArgument);
  }
}

TEST(Metrics, UniqueRatioBoundary) {
  // Exactly delta apart counts as distinct.
  const std::vector<JointState> s{state({0.0}), state({0.15})};
  EXPECT_DOUBLE_EQ(unique_ratio(s, state({0.15})), 1.0);
}

TEST(Metrics, GoalExamples) {
  const auto deltas = state({0.15, 0.15});
  const auto init = state({0.0, 0.0}), goal = state({0.6, 0.8});
  EXPECT_EQ(goal_metric(goal, goal, init, deltas).e_goal, 0.0);
  EXPECT_TRUE(goal_metric(goal, goal, init, deltas).success);
  EXPECT_DOUBLE_EQ(goal_metric(init, goal, init, deltas).e_goal, 1.0);
  EXPECT_FALSE(goal_metric(init, goal, init, deltas).success);
  const auto half = goal_metric(state({0.3, 0.4}), goal, init, deltas);
  EXPECT_DOUBLE_EQ(half.e_goal, 0.5);
  EXPECT_FALSE(half.success);
  EXPECT_FALSE(goal_metric(state({0.54, 0.72}), goal, init, deltas).success);  // exactly 0.1
  EXPECT_TRUE(goal_metric(state({0.55, 0.73}), goal, init, deltas).success);
  try {
    goal_metric(init, init, init, deltas);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefinedTask);
  }
}

TEST(TrainConfig, SequenceLengthSchedule) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.trajectories_per_epoch, 16);
  EXPECT_EQ(cfg.iterations_per_head, 8);
  EXPECT_EQ(cfg.buffer_capacity, 6400u);
  EXPECT_EQ(cfg.sequence_length(0), 4);
  EXPECT_EQ(cfg.sequence_length(999), 4);
  EXPECT_EQ(cfg.sequence_length(1000), 6);
  EXPECT_EQ(cfg.sequence_length(1399), 6);
  EXPECT_EQ(cfg.sequence_length(1400), 8);
  int prev = 4;
  for (long e = 0; e < 20000; e += 7) {
    const int len = cfg.sequence_length(e);
    EXPECT_GE(len, prev);
    EXPECT_LE(len, 20);
    EXPECT_EQ(len % 2, 0);
    prev = len;
  }
  EXPECT_EQ(cfg.sequence_length(100000), 20);
}

TEST(Explore, OracleDoorContradictoryHalves) {
  const auto door = generate_object("door", 0, 7);
  const Agent agent = oracle_agent();
  for (std::uint64_t e = 0; e < 5; ++e) {
    Environment env(door, door.lower_limits(), mix_seed(1, e));
    const EpisodeResult r = explore_episode(env, agent, {8, ExploreMode::kContradictory, 0.0, 0.0}, mix_seed(2, e));
    ASSERT_EQ(r.steps(), 8);
    for (int s = 0; s < 8; ++s) {
      const double change = r.transitions[static_cast<std::size_t>(s)].j_curr[0] -
                            r.transitions[static_cast<std::size_t>(s)].j_prev[0];
      if (s < 4) {
        EXPECT_GT(change, 0.0) << "episode " << e << " step " << s;
      } else {
        EXPECT_LT(change, 0.0) << "episode " << e << " step " << s;
      }
    }
  }
}

TEST(Explore, BaseOnlyNeverMoves) {
  const auto obj = cube();
  const Agent agent = oracle_agent();
  Environment env(obj, Eigen::VectorXd(0), 3);
  const EpisodeResult r = explore_episode(env, agent, {6, ExploreMode::kContradictory, 1.0, 1.0}, 4);
  for (const auto& t : r.transitions) EXPECT_EQ(t.outcome.r_aot, AotLabel::kStill);
}

TEST(Explore, FullEpsilonGraspsUniformly) {
  // With epsilon 1 the grasp is uniform over the sampled points, so the
  // share landing on the door matches its share of points.
  const auto door = generate_object("door", 0, 7);
  const Agent agent = oracle_agent();
  Environment probe(door, door.lower_limits(), 11);
  double door_share = 0.0;
  for (const auto& p : probe.observation()->points) door_share += p.link != 0;
  door_share /= static_cast<double>(probe.observation()->size());
  int on_door = 0;
  std::set<std::size_t> distinct;
  const int n = 1000;
  for (int e = 0; e < n; ++e) {
    Environment env(door, door.lower_limits(), 11);
    const EpisodeResult r = explore_episode(env, agent, {2, ExploreMode::kContradictory, 1.0, 1.0},
                                            mix_seed(3, static_cast<std::uint64_t>(e)));
    ASSERT_TRUE(r.grasp_index.has_value());
    distinct.insert(*r.grasp_index);
    on_door += env.observation()->points[*r.grasp_index].link != 0;
  }
  const double sd = std::sqrt(door_share * (1 - door_share) / n);
  EXPECT_NEAR(on_door / static_cast<double>(n), door_share, 4 * sd);
  EXPECT_GT(distinct.size(), 400u);
}

TEST(Explore, ContradictorySymmetry) {
  // Oracle, 1-DoF, away from limits: second-half steps labelled backward move
  // against the first half's net displacement while still on the forward side.
  // Near-axis grasps may overshoot j_init, so only the sign is checked.
  const auto h = hinge(-6.0, 6.0);
  const Agent agent = oracle_agent();
  int backward = 0;
  for (std::uint64_t e = 0; e < 10; ++e) {
    Environment env(h, state({0.0}), mix_seed(9, e));
    const EpisodeResult r = explore_episode(env, agent, {8, ExploreMode::kContradictory, 0.0, 0.0}, mix_seed(8, e));
    ASSERT_EQ(r.transitions.size(), 8u);
    const double forward = r.transitions[3].j_curr[0] - r.transitions[0].j_prev[0];
    for (std::size_t s = 4; s < r.transitions.size(); ++s) {
      const auto& t = r.transitions[s];
      if (t.outcome.r_aot != AotLabel::kBackward || (t.j_prev[0] - t.j_init[0]) * forward <= 0.0) continue;
      ++backward;
      EXPECT_LT((t.j_curr[0] - t.j_prev[0]) * forward, 0.0) << "episode " << e << " step " << s;
    }
  }
  EXPECT_GT(backward, 10);
}

TEST(Explore, PushesToBuffer) {
  const auto door = generate_object("door", 0, 7);
  ReplayBuffer buffer;
  Environment env(door, door.lower_limits(), 1);
  explore_episode(env, oracle_agent(), {6, ExploreMode::kContradictory, 0.0, 0.0}, 2, &buffer);
  EXPECT_EQ(buffer.size(), 6u);
}

TEST(DiffMask, IdenticalObservationsMaskEverything) {
  const auto door = generate_object("door", 0, 7);
  const Observation obs = sample_surface(door, door.lower_limits(), 512, 1);
  const std::vector<double> ones(512, 1.0);
  for (double s : diff_mask_filter(obs, obs, ones)) EXPECT_EQ(s, 0.0);
}

TEST(DiffMask, OnlyMovedLinkSurvives) {
  const auto dd = generate_object("double_door", 0, 7);
  const auto init = dd.lower_limits();
  Eigen::VectorXd goal = init;
  goal[0] = dd.joint(0).upper;
  const Observation a = sample_surface(dd, init, 512, 1);
  const Observation b = sample_surface(dd, goal, 512, 1);
  const std::vector<double> ones(512, 1.0);
  const auto f = diff_mask_filter(a, b, ones);
  const int moved_link = dd.joint_link(0);
  int survived = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_EQ(f[i], a.points[i].link == moved_link ? 1.0 : 0.0);
    survived += f[i] > 0;
  }
  EXPECT_GT(survived, 0);
}

TEST(DiffMask, MultipliesScoresAndChecksShape) {
  const auto door = generate_object("door", 0, 7);
  const Observation a = sample_surface(door, door.lower_limits(), 256, 1);
  const Observation b = sample_surface(door, door.upper_limits(), 256, 1);
  std::vector<double> scores(256);
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = 0.001 * static_cast<double>(i);
  const auto f = diff_mask_filter(a, b, scores);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], a.points[i].link == 0 ? 0.0 : scores[i]);
  const Observation c = sample_surface(door, door.upper_limits(), 128, 1);
  try {
    diff_mask_filter(a, c, scores);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Goal, AlreadyAtGoalExecutesNothing) {
  const Agent agent = oracle_agent();
  for (const auto& obj : generate_suite(ObjectSuiteSpec::standard(3))) {
    GoalTask task;
    task.name = "noop";
    task.j_init = obj.lower_limits();
    task.j_goal = obj.lower_limits();
    task.observation_seed = 5;
    Environment env(obj, task.j_init, task.observation_seed);
    task.obs_goal = env.initial_observation();
    const EpisodeResult r = goal_episode(env, agent, task, 1);
    EXPECT_EQ(r.steps(), 0) << obj.name();
  }
}

TEST(Goal, OracleOpensDoor) {
  const auto door = generate_object("door", 0, 7);
  GoalTaskOptions opt;
  opt.observation_seed = 3;
  const auto tasks = make_goal_tasks(door, opt);
  ASSERT_EQ(tasks.size(), 2u);
  EXPECT_EQ(tasks[0].name, "open");
  EXPECT_EQ(tasks[1].name, "close");
  for (const auto& task : tasks) {
    EXPECT_LE(task.budget, kMaxGoalSteps);
    Environment env(door, task.j_init, task.observation_seed);
    const EpisodeResult r = goal_episode(env, oracle_agent(), task, 17);
    EXPECT_LE(r.steps(), task.budget);
    const GoalMetric g = goal_metric(r.final_state, task.j_goal, task.j_init, door.deltas());
    EXPECT_LE(g.e_goal, 0.1) << task.name;
  }
  EXPECT_EQ(tasks[0].j_goal[0], door.joint(0).upper);
  EXPECT_EQ(tasks[1].j_goal[0], door.joint(0).lower);
}

TEST(Goal, TightBudgetExhausts) {
  const auto door = generate_object("door", 0, 7);
  GoalTask task;
  task.name = "far";
  task.j_init = door.lower_limits();
  task.j_goal = door.upper_limits();
  task.observation_seed = 3;
  task.budget = 2;
  Environment env(door, task.j_init, task.observation_seed);
  task.obs_goal = env.observe(task.j_goal);
  const EpisodeResult r = goal_episode(env, oracle_agent(), task, 4);
  EXPECT_EQ(r.termination, Termination::kBudgetExhausted);
  EXPECT_EQ(r.steps(), 2);
  EXPECT_GT(goal_metric(r.final_state, task.j_goal, task.j_init, door.deltas()).e_goal, 0.1);
}

TEST(Goal, BudgetsRespectedAcrossSuite) {
  const auto suite = generate_suite(ObjectSuiteSpec::standard(5));
  for (const auto& obj : suite) {
    GoalTaskOptions opt;
    opt.observation_seed = 8;
    for (const auto& task : make_goal_tasks(obj, opt)) {
      EXPECT_GE(task.budget, 1);
      EXPECT_LE(task.budget, std::min(obj.step_budget(), kMaxGoalSteps));
      for (const auto kind : {BaselineKind::kRandom, BaselineKind::kOracle}) {
        Environment env(obj, task.j_init, task.observation_seed);
        const EpisodeResult r = goal_episode(env, Agent{kind, &oracle_model(), CemConfig{}}, task, 3);
        EXPECT_LE(r.steps(), task.budget);
      }
    }
  }
}

TEST(Training, ShortRunsAreDeterministic) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.trajectories_per_epoch = 4;
  cfg.iterations_per_head = 2;
  const auto suite = generate_suite(ObjectSuiteSpec::starter(1));
  const TrainingResult a = run_training(cfg, suite, 42);
  const TrainingResult b = run_training(cfg, suite, 42);
  ASSERT_EQ(a.logs.size(), 3u);
  EXPECT_EQ(a.logs, b.logs);
  EXPECT_EQ(a.model.position.network().parameters(), b.model.position.network().parameters());
  EXPECT_EQ(a.logs[0].position_epsilon, 1.0);
  EXPECT_EQ(a.logs[0].length, 4);
  EXPECT_EQ(a.logs[2].buffer_size, 3u * 4u * 4u);
}

TEST(Training, CallbackStopsEarly) {
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.trajectories_per_epoch = 2;
  cfg.iterations_per_head = 1;
  const auto suite = generate_suite(ObjectSuiteSpec::starter(1));
  const TrainingResult r = run_training(cfg, suite, 1, [](const EpochLog& l, const PolicyModel&) { return l.epoch < 1; });
  EXPECT_TRUE(r.interrupted);
  EXPECT_EQ(r.logs.size(), 2u);
}

TEST(Training, RejectsEmptySuite) { EXPECT_THROW(run_training(TrainConfig{}, {}, 1), Error); }

}  // namespace
}  // namespace umanip
