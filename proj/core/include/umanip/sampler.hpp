#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "umanip/geometry.hpp"
#include "umanip/interaction.hpp"
#include "umanip/rng.hpp"

namespace umanip {

struct CandidateSet {
  std::vector<Vec3> directions;
  std::vector<double> scores;  // empty until scored; aligned with directions

  std::size_t size() const { return directions.size(); }
  bool scored() const { return !directions.empty() && scores.size() == directions.size(); }
};

struct CemConfig {
  std::size_t n_samples = 64;
  double temperature = 20.0;
  int rounds = 2;
  double noise_sigma = 0.1;  // rad, tangent-plane Gaussian

  void validate() const;
  bool operator==(const CemConfig&) const = default;
};

// n independent draws uniform on the unit sphere.
CandidateSet uniform_directions(std::size_t n, Rng& rng);

// Softmax resampling distribution p_i ∝ exp(T * s_i); non-finite scores get
// zero mass. Throws kScore when no score is finite.
std::vector<double> resampling_distribution(std::span<const double> scores, double temperature);

// One refinement round: resample n_samples candidates from the softmax over
// scores, perturb each in its tangent plane and renormalise.
CandidateSet cem_round(const CandidateSet& candidates, const CemConfig& cfg, Rng& rng);

// Scores a batch of directions; called once per round.
using DirectionScoreFn = std::function<std::vector<double>(std::span<const Vec3>)>;

// Uniform first round followed by cfg.rounds - 1 refinement rounds. Returns
// the union of every round's candidates with their scores.
CandidateSet cem_sample(const DirectionScoreFn& score, const CemConfig& cfg, Rng& rng);

enum class SelectionMode { kForward, kBackward, kGoal };

struct DirectionChoice {
  std::optional<std::size_t> index;  // empty iff terminate
  bool terminate = false;
};

// Forward picks the largest predicted distance among candidates predicted
// +1; Backward and Goal among those predicted -1. Goal with no -1 candidate
// terminates; Forward/Backward fall back to the unrestricted argmax. Ties go
// to the lowest index.
DirectionChoice select_direction(std::size_t count, std::span<const double> dist_scores,
                                 std::span<const AotLabel> aot_labels, SelectionMode mode);

// Lowest-index argmax over the given indices (all indices when empty).
std::size_t argmax(std::span<const double> values, std::span<const std::size_t> subset = {});

}  // namespace umanip
