#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "umanip/policy.hpp"
#include "umanip/sampler.hpp"

namespace umanip {

// Selection rules compared in the benchmarks. All of them run over the same
// CEM candidate sets and scorers; they differ only in how a candidate is
// picked (and SingleStep/HeuristicFilter in which reference observation the
// AoT head sees).
enum class BaselineKind { kRandom, kSingleStep, kAotOnly, kSignedDist, kHeuristicFilter, kOracle, kLearned };

const char* to_string(BaselineKind kind);
BaselineKind baseline_from_string(const std::string& name);
const std::vector<BaselineKind>& all_baselines();

struct Agent {
  BaselineKind kind = BaselineKind::kOracle;
  const PolicyModel* model = nullptr;  // must outlive the agent
  CemConfig cem;

  // SingleStep and HeuristicFilter condition on the current observation only.
  bool uses_history() const { return kind != BaselineKind::kSingleStep && kind != BaselineKind::kHeuristicFilter; }
};

// Epsilon-greedy grasp choice. Greedy picks uniformly among the points that
// share the top score; with require_positive an all-zero map yields nothing.
std::optional<std::size_t> choose_position(std::span<const double> scores, double epsilon, Rng& rng,
                                           bool require_positive = false);

struct DirectionContext {
  SelectionMode mode = SelectionMode::kForward;
  const Observation* obs_curr = nullptr;
  const Observation* obs_ref = nullptr;  // initial observation or goal
  SurfacePoint grasp;
  OracleView truth;                        // reference = state behind obs_ref
  std::optional<Vec3> previous_direction;  // last executed action, if any
  double epsilon = 0.0;
};

struct DirectionDecision {
  CandidateSet candidates;  // union over CEM rounds, scores = oriented dist * E[aot]
  DirectionScores scores;   // per candidate, aligned with candidates
  DirectionChoice choice;
  bool explored = false;  // epsilon branch taken
};

// Draws candidates with CEM from candidate_seed and picks one with the
// agent's rule; epsilon and tie draws come from selection_seed.
DirectionDecision decide_direction(const Agent& agent, const DirectionContext& ctx, std::uint64_t candidate_seed,
                                   std::uint64_t selection_seed);

}  // namespace umanip
