#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "umanip/interaction.hpp"
#include "umanip/mlp.hpp"
#include "umanip/replay_buffer.hpp"

namespace umanip {

enum class ScorerMode { kLearned, kOracle };

const char* to_string(ScorerMode mode);

// Ground truth read by the oracle scorers only.
struct OracleView {
  const ArticulatedObject* object = nullptr;
  JointState state;      // behind the current observation
  JointState reference;  // behind the reference observation (initial or goal)
};

inline constexpr double kDefaultLambda = 100.0;

struct LossConfig {
  double lambda = kDefaultLambda;
  double learning_rate = 1e-3;
  StepRule step_rule = StepRule::kGradientDescent;

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

struct ModelConfig {
  int hidden_width = 64;
  double init_range = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Linear decay from eps_start to eps_min over n_epochs, then flat.
struct EpsilonSchedule {
  double eps_start = 1.0;
  double eps_min = 0.1;
  long n_epochs = 300;

  double value(long epoch) const;

  static EpsilonSchedule position() { return {1.0, 0.1, 300}; }
  static EpsilonSchedule direction() { return {1.0, 0.2, 500}; }
  bool operator==(const EpsilonSchedule&) const = default;
};

inline constexpr int kPositionInputDim = kPointFeatureDim + kPooledFeatureDim;
inline constexpr int kDistInputDim = kPooledFeatureDim + kPointFeatureDim + 3;
inline constexpr int kAotInputDim = 2 * kPooledFeatureDim + 2 * kPointFeatureDim + 3;

// Mean binary cross-entropy; probabilities are clamped away from 0 and 1.
double binary_cross_entropy(std::span<const double> probs, std::span<const int> labels);
// Mean squared error.
double mean_squared_error(std::span<const double> pred, std::span<const double> target);
// Mean cross-entropy of {-1, 0, +1} distributions against labels.
double aot_cross_entropy(std::span<const std::array<double, 3>> probs, std::span<const AotLabel> labels);
double combined_direction_loss(std::span<const double> dist_pred, std::span<const double> dist_target,
                               std::span<const std::array<double, 3>> aot_probs,
                               std::span<const AotLabel> aot_labels, double lambda);

class PositionScorer {
 public:
  static PositionScorer oracle();
  PositionScorer(const ModelConfig& model, const LossConfig& loss);

  ScorerMode mode() const { return mode_; }
  const Mlp& network() const { return net_; }
  Mlp& network() { return net_; }

  // Per-point score in [0, 1]. The oracle needs truth.object and truth.state.
  std::vector<double> score(const Observation& observation, const OracleView& truth = {}) const;

  // One gradient step on the mean BCE at the executed points; returns the
  // loss before the step.
  double train_step(const PositionBatch& batch);
  double grad_check(const PositionBatch& batch) const;

  static Eigen::MatrixXd batch_inputs(const PositionBatch& batch);

 private:
  PositionScorer() = default;

  ScorerMode mode_ = ScorerMode::kOracle;
  Mlp net_;
  Optimizer optimizer_;
};

struct DirectionQuery {
  const Observation* obs_curr = nullptr;
  const Observation* obs_ref = nullptr;  // initial observation, or the goal
  SurfacePoint grasp;
  OracleView truth;
};

struct DirectionScores {
  std::vector<double> dist;
  std::vector<std::array<double, 3>> aot;  // ordered {-1, 0, +1}

  std::size_t size() const { return dist.size(); }
  AotLabel label(std::size_t i) const;
  std::vector<AotLabel> labels() const;
  // p(+1) - p(-1)
  double expected_aot(std::size_t i) const;
};

struct DirectionLoss {
  double dist = 0.0;      // MSE
  double aot = 0.0;       // cross-entropy
  double combined = 0.0;  // lambda * dist + aot
};

class DirectionScorer {
 public:
  static DirectionScorer oracle();
  DirectionScorer(const ModelConfig& model, const LossConfig& loss);

  ScorerMode mode() const { return mode_; }
  const LossConfig& loss_config() const { return loss_; }
  const Mlp& dist_network() const { return dist_net_; }
  const Mlp& aot_network() const { return aot_net_; }
  Mlp& dist_network() { return dist_net_; }
  Mlp& aot_network() { return aot_net_; }

  DirectionScores score(const DirectionQuery& query, std::span<const Vec3> directions) const;

  DirectionLoss train_step(const DirectionBatch& batch);
  double grad_check(const DirectionBatch& batch) const;

  struct Inputs {
    Eigen::MatrixXd dist;
    Eigen::MatrixXd aot;
  };
  static Inputs batch_inputs(const DirectionBatch& batch);

 private:
  DirectionScorer() = default;

  ScorerMode mode_ = ScorerMode::kOracle;
  LossConfig loss_;
  Mlp dist_net_;
  Mlp aot_net_;
  Optimizer dist_optimizer_;
  Optimizer aot_optimizer_;
};

struct PolicyModel {
  ModelConfig model;
  LossConfig loss;
  PositionScorer position = PositionScorer::oracle();
  DirectionScorer direction = DirectionScorer::oracle();

  static PolicyModel oracle();
  static PolicyModel learned(const ModelConfig& model, const LossConfig& loss);
  ScorerMode mode() const { return position.mode(); }
  // Largest relative gradient error over all three heads.
  double grad_check(const PositionBatch& positions, const DirectionBatch& directions) const;
};

// Versioned JSON dump of configs and parameters; parameters round-trip bit-exactly.
std::string serialize_checkpoint(const PolicyModel& model);
PolicyModel parse_checkpoint(const std::string& text);
void save_checkpoint(const PolicyModel& model, const std::string& path);
PolicyModel load_checkpoint(const std::string& path);

}  // namespace umanip
