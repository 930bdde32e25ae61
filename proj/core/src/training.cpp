#include "umanip/training.hpp"

#include <algorithm>

#include "umanip/agent.hpp"
#include "umanip/error.hpp"
#include "umanip/tasks.hpp"

namespace umanip {

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorKind::kConfig, "epochs must be non-negative");
  if (trajectories_per_epoch < 1) throw Error(ErrorKind::kConfig, "trajectories_per_epoch must be positive");
  if (iterations_per_head < 0) throw Error(ErrorKind::kConfig, "iterations_per_head must be non-negative");
  if (initial_length < 2 || max_length < initial_length) throw Error(ErrorKind::kConfig, "bad sequence lengths");
  if (growth_interval < 1 || growth_step < 0) throw Error(ErrorKind::kConfig, "bad sequence growth rule");
  if (buffer_capacity == 0) throw Error(ErrorKind::kConfig, "buffer capacity must be positive");
  if (checkpoint_every < 0) throw Error(ErrorKind::kConfig, "checkpoint_every must be non-negative");
  model.validate();
  loss.validate();
  cem.validate();
}

int TrainConfig::sequence_length(long epoch) const {
  if (epoch < growth_start) return initial_length;
  const long grown = 1 + (epoch - growth_start) / growth_interval;
  const long length = initial_length + growth_step * grown;
  return static_cast<int>(std::min<long>(length, max_length));
}

TrainingResult run_training(const TrainConfig& cfg, const std::vector<ArticulatedObject>& suite, std::uint64_t seed,
                            const EpochCallback& on_epoch) {
  cfg.validate();
  if (suite.empty()) throw Error(ErrorKind::kArgument, "training suite is empty");
  TrainingResult result{PolicyModel::learned(cfg.model, cfg.loss), {}, false};
  ReplayBuffer buffer(cfg.buffer_capacity);
  const Agent agent{BaselineKind::kLearned, &result.model, cfg.cem};
  std::uint64_t episode_id = 0;

  for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.length = cfg.sequence_length(epoch);
    log.position_epsilon = cfg.position_epsilon.value(epoch);
    log.direction_epsilon = cfg.direction_epsilon.value(epoch);
    const auto e = static_cast<std::uint64_t>(epoch);

    Rng rollout_rng(mix_seed(seed, e, 0x726f6c6c));
    for (int k = 0; k < cfg.trajectories_per_epoch; ++k) {
      const ArticulatedObject& object = suite[rollout_rng.index(suite.size())];
      JointState init = object.lower_limits();
      const JointState hi = object.upper_limits();
      for (Eigen::Index j = 0; j < init.size(); ++j) init[j] = rollout_rng.uniform(init[j], hi[j]);
      const std::uint64_t episode_seed = rollout_rng.next();
      Environment env(object, init, mix_seed(episode_seed, 0x6f6273), episode_id++);
      const ExploreOptions opts{log.length, ExploreMode::kContradictory, log.position_epsilon, log.direction_epsilon};
      const EpisodeResult r = explore_episode(env, agent, opts, episode_seed, &buffer);
      const bool moved = std::any_of(r.transitions.begin(), r.transitions.end(),
                                     [](const Transition& t) { return t.outcome.r_dist > 0.0; });
      if (moved) ++log.moved_episodes;
    }

    for (int it = 0; it < cfg.iterations_per_head; ++it) {
      const auto i = static_cast<std::uint64_t>(it);
      const PositionBatch pb = buffer.sample_position_batch(kPositionBatchSize, mix_seed(seed, e, 0x100 + i));
      log.position_loss += result.model.position.train_step(pb);
      const DirectionBatch db = buffer.sample_direction_batch(kDirectionBatchSize, mix_seed(seed, e, 0x200 + i));
      const DirectionLoss dl = result.model.direction.train_step(db);
      log.dist_loss += dl.dist;
      log.aot_loss += dl.aot;
    }
    if (cfg.iterations_per_head > 0) {
      const double n = cfg.iterations_per_head;
      log.position_loss /= n;
      log.dist_loss /= n;
      log.aot_loss /= n;
    }
    log.buffer_size = buffer.size();
    result.logs.push_back(log);

    if (cfg.checkpoint_every > 0 && !cfg.checkpoint_path.empty() && (epoch + 1) % cfg.checkpoint_every == 0) {
      save_checkpoint(result.model, cfg.checkpoint_path);
    }
    if (on_epoch && !on_epoch(log, result.model)) {
      result.interrupted = true;
      break;
    }
  }
  return result;
}

}  // namespace umanip
