#include "umanip/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "umanip/error.hpp"

namespace umanip {

void CemConfig::validate() const {
  if (n_samples < 2) throw Error(ErrorKind::kConfig, "CEM needs at least two samples");
  if (!(temperature > 0.0)) throw Error(ErrorKind::kConfig, "CEM temperature must be positive");
  if (rounds < 1) throw Error(ErrorKind::kConfig, "CEM needs at least one round");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::kConfig, "CEM noise must be non-negative");
}

CandidateSet uniform_directions(std::size_t n, Rng& rng) {
  CandidateSet set;
  set.directions.reserve(n);
  while (set.directions.size() < n) {
    const Vec3 g(rng.normal(), rng.normal(), rng.normal());
    const double len = g.norm();
    if (len < 1e-12) continue;
    set.directions.push_back(g / len);
  }
  return set;
}

std::vector<double> resampling_distribution(std::span<const double> scores, double temperature) {
  double best = -std::numeric_limits<double>::infinity();
  for (double s : scores) {
    if (std::isfinite(s)) best = std::max(best, s);
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::kScore, "no finite candidate score");
  std::vector<double> p(scores.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) continue;
    p[i] = std::exp(temperature * (scores[i] - best));
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

namespace {

Vec3 perturb(const Vec3& d, double sigma, Rng& rng) {
  if (sigma == 0.0) return d;
  const Vec3 helper = std::abs(d.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = d.cross(helper).normalized();
  const Vec3 v = d.cross(u);
  const double a = rng.normal();
  const double b = rng.normal();
  return (d + sigma * (a * u + b * v)).normalized();
}

}  // namespace

CandidateSet cem_round(const CandidateSet& candidates, const CemConfig& cfg, Rng& rng) {
  if (!candidates.scored()) throw Error(ErrorKind::kArgument, "cem_round requires scored candidates");
  const std::vector<double> p = resampling_distribution(candidates.scores, cfg.temperature);
  std::vector<double> cdf(p.size());
  std::partial_sum(p.begin(), p.end(), cdf.begin());
  CandidateSet out;
  out.directions.reserve(cfg.n_samples);
  for (std::size_t i = 0; i < cfg.n_samples; ++i) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= p.size()) idx = p.size() - 1;
    while (p[idx] == 0.0 && idx > 0) --idx;  // guard against landing on a zero-mass slot
    out.directions.push_back(perturb(candidates.directions[idx], cfg.noise_sigma, rng));
  }
  return out;
}

CandidateSet cem_sample(const DirectionScoreFn& score, const CemConfig& cfg, Rng& rng) {
  cfg.validate();
  CandidateSet round = uniform_directions(cfg.n_samples, rng);
  round.scores = score(round.directions);
  CandidateSet all = round;
  for (int r = 1; r < cfg.rounds; ++r) {
    round = cem_round(round, cfg, rng);
    round.scores = score(round.directions);
    all.directions.insert(all.directions.end(), round.directions.begin(), round.directions.end());
    all.scores.insert(all.scores.end(), round.scores.begin(), round.scores.end());
  }
  return all;
}

std::size_t argmax(std::span<const double> values, std::span<const std::size_t> subset) {
  if (values.empty()) throw Error(ErrorKind::kArgument, "argmax over an empty set");
  std::size_t best = subset.empty() ? 0 : subset.front();
  auto consider = [&](std::size_t i) {
    if (values[i] > values[best]) best = i;
  };
  if (subset.empty()) {
    for (std::size_t i = 0; i < values.size(); ++i) consider(i);
  } else {
    for (std::size_t i : subset) {
      if (values[i] > values[best] || (values[i] == values[best] && i < best)) best = i;
    }
  }
  return best;
}

DirectionChoice select_direction(std::size_t count, std::span<const double> dist_scores,
                                 std::span<const AotLabel> aot_labels, SelectionMode mode) {
  if (count == 0) throw Error(ErrorKind::kArgument, "empty candidate set");
  if (dist_scores.size() != count || aot_labels.size() != count) {
    throw Error(ErrorKind::kShape, "scores must align with candidates");
  }
  const AotLabel wanted = mode == SelectionMode::kForward ? AotLabel::kForward : AotLabel::kBackward;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < count; ++i) {
    if (aot_labels[i] == wanted) eligible.push_back(i);
  }
  DirectionChoice choice;
  if (eligible.empty()) {
    if (mode == SelectionMode::kGoal) {
      choice.terminate = true;
      return choice;
    }
    choice.index = argmax(dist_scores);
    return choice;
  }
  choice.index = argmax(dist_scores, eligible);
  return choice;
}

}  // namespace umanip
