#include "umanip/agent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "umanip/error.hpp"

namespace umanip {

namespace {

struct NamedBaseline {
  BaselineKind kind;
  const char* name;
};

constexpr NamedBaseline kNames[] = {
    {BaselineKind::kRandom, "random"},         {BaselineKind::kSingleStep, "single_step"},
    {BaselineKind::kAotOnly, "aot_only"},      {BaselineKind::kSignedDist, "signed_dist"},
    {BaselineKind::kHeuristicFilter, "heuristic_filter"}, {BaselineKind::kOracle, "oracle"},
    {BaselineKind::kLearned, "learned"},
};

// Sign that turns "good for this mode" into "large".
double orientation(SelectionMode mode) { return mode == SelectionMode::kForward ? 1.0 : -1.0; }

AotLabel wanted_label(SelectionMode mode) {
  return mode == SelectionMode::kForward ? AotLabel::kForward : AotLabel::kBackward;
}

}  // namespace

const char* to_string(BaselineKind kind) {
  for (const auto& n : kNames) {
    if (n.kind == kind) return n.name;
  }
  return "unknown";
}

BaselineKind baseline_from_string(const std::string& name) {
  for (const auto& n : kNames) {
    if (name == n.name) return n.kind;
  }
  throw Error(ErrorKind::kConfig, "unknown policy '" + name + "'");
}

const std::vector<BaselineKind>& all_baselines() {
  static const std::vector<BaselineKind> kinds = [] {
    std::vector<BaselineKind> v;
    for (const auto& n : kNames) v.push_back(n.kind);
    return v;
  }();
  return kinds;
}

std::optional<std::size_t> choose_position(std::span<const double> scores, double epsilon, Rng& rng,
                                           bool require_positive) {
  if (scores.empty()) return std::nullopt;
  const double top = *std::max_element(scores.begin(), scores.end());
  if (require_positive && !(top > 0.0)) return std::nullopt;
  if (rng.bernoulli(epsilon)) {
    if (!require_positive) return rng.index(scores.size());
    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] > 0.0) positive.push_back(i);
    }
    return positive[rng.index(positive.size())];
  }
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] == top) best.push_back(i);
  }
  return best[rng.index(best.size())];
}

DirectionDecision decide_direction(const Agent& agent, const DirectionContext& ctx, std::uint64_t candidate_seed,
                                   std::uint64_t selection_seed) {
  if (agent.model == nullptr) throw Error(ErrorKind::kArgument, "agent has no policy model");
  DirectionQuery query;
  query.obs_curr = ctx.obs_curr;
  query.obs_ref = agent.uses_history() ? ctx.obs_ref : ctx.obs_curr;
  query.grasp = ctx.grasp;
  query.truth = ctx.truth;
  if (!agent.uses_history()) query.truth.reference = ctx.truth.state;

  const double sign = orientation(ctx.mode);
  DirectionDecision out;
  const DirectionScoreFn score_fn = [&](std::span<const Vec3> dirs) {
    DirectionScores s = agent.model->direction.score(query, dirs);
    std::vector<double> combined(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) combined[i] = sign * s.dist[i] * s.expected_aot(i);
    out.scores.dist.insert(out.scores.dist.end(), s.dist.begin(), s.dist.end());
    out.scores.aot.insert(out.scores.aot.end(), s.aot.begin(), s.aot.end());
    return combined;
  };
  Rng candidate_rng(candidate_seed);
  out.candidates = cem_sample(score_fn, agent.cem, candidate_rng);

  Rng rng(selection_seed);
  const std::size_t n = out.candidates.size();
  if (rng.bernoulli(ctx.epsilon)) {
    out.explored = true;
    out.choice.index = rng.index(n);
    return out;
  }

  const std::vector<AotLabel> labels = out.scores.labels();
  const AotLabel wanted = wanted_label(ctx.mode);
  switch (agent.kind) {
    case BaselineKind::kRandom:
      out.choice.index = rng.index(n);
      break;
    case BaselineKind::kOracle:
    case BaselineKind::kLearned:
    case BaselineKind::kSingleStep:
      out.choice = select_direction(n, out.scores.dist, labels, ctx.mode);
      break;
    case BaselineKind::kHeuristicFilter: {
      std::vector<std::size_t> kept;
      for (std::size_t i = 0; i < n; ++i) {
        if (!ctx.previous_direction || out.candidates.directions[i].dot(*ctx.previous_direction) >= 0.0) {
          kept.push_back(i);
        }
      }
      if (kept.empty()) {
        out.choice = select_direction(n, out.scores.dist, labels, ctx.mode);
        break;
      }
      std::vector<double> dist;
      std::vector<AotLabel> kept_labels;
      for (std::size_t i : kept) {
        dist.push_back(out.scores.dist[i]);
        kept_labels.push_back(labels[i]);
      }
      const DirectionChoice c = select_direction(kept.size(), dist, kept_labels, ctx.mode);
      out.choice.terminate = c.terminate;
      if (c.index) out.choice.index = kept[*c.index];
      break;
    }
    case BaselineKind::kAotOnly: {
      std::vector<std::size_t> eligible;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == wanted) eligible.push_back(i);
      }
      if (!eligible.empty()) {
        out.choice.index = eligible[rng.index(eligible.size())];
      } else if (ctx.mode == SelectionMode::kGoal) {
        out.choice.terminate = true;
      } else {
        out.choice.index = rng.index(n);
      }
      break;
    }
    case BaselineKind::kSignedDist: {
      // candidates.scores already hold the oriented signed distance.
      const std::size_t best = argmax(out.candidates.scores);
      if (ctx.mode == SelectionMode::kGoal && !(out.candidates.scores[best] > 0.0)) {
        out.choice.terminate = true;
      } else {
        out.choice.index = best;
      }
      break;
    }
  }
  return out;
}

}  // namespace umanip
